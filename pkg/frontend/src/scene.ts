/**
 * Scene graph built from service payloads.
 *
 * Rebuilding is deterministic: the same payload produces the same set of
 * named objects with the same geometry buffers.  Nothing here integrates,
 * differentiates, or solves; it only draws what the service sent.
 */

import * as THREE from "three";

import type { CurvePayload, MeshPayload, Vec3 } from "./messages.js";
import { CircleData, circlePolyline } from "./osculating.js";

export interface VisibilityToggles {
  curve: boolean;
  evolute: boolean;
  midpoint: boolean;
  symmetryLines: boolean;
  tube: boolean;
  osculating: boolean;
}

export const DEFAULT_TOGGLES: VisibilityToggles = {
  curve: true,
  evolute: true,
  midpoint: false,
  symmetryLines: true,
  tube: false,
  osculating: true,
};

const COLORS = {
  curve: 0x2b6fd4,
  evolute: 0xd4572b,
  midpoint: 0x2bd46f,
  symmetry: 0x888888,
  circle: 0xf0c020,
  tube: 0x99aabb,
};

function lineFromPoints(points: Vec3[], color: number, name: string): THREE.Line {
  const geo = new THREE.BufferGeometry();
  geo.setAttribute("position",
    new THREE.Float32BufferAttribute(points.flat(), 3));
  const line = new THREE.Line(geo, new THREE.LineBasicMaterial({ color }));
  line.name = name;
  return line;
}

export class ExplorerScene {
  scene = new THREE.Scene();
  private group = new THREE.Group();
  private circleLine: THREE.Line | null = null;
  toggles: VisibilityToggles = { ...DEFAULT_TOGGLES };

  constructor() {
    this.scene.add(this.group);
    const ambient = new THREE.AmbientLight(0xffffff, 0.7);
    const key = new THREE.DirectionalLight(0xffffff, 1.2);
    key.position.set(4, 6, 8);
    this.scene.add(ambient, key);
  }

  clear(): void {
    for (const child of [...this.group.children]) {
      this.group.remove(child);
      (child as THREE.Mesh).geometry?.dispose?.();
    }
    this.circleLine = null;
  }

  buildFromCurve(payload: CurvePayload): void {
    this.clear();
    this.group.add(lineFromPoints(payload.positions, COLORS.curve, "curve"));
    this.group.add(lineFromPoints(payload.evolute_positions, COLORS.evolute,
                                  "evolute"));
    this.group.add(lineFromPoints(payload.midpoint_positions, COLORS.midpoint,
                                  "midpoint"));
    const linesGroup = new THREE.Group();
    linesGroup.name = "symmetryLines";
    const span = payload.diameter;
    for (const ln of payload.symmetry_lines) {
      const a: Vec3 = [
        ln.base[0] - span * ln.direction[0],
        ln.base[1] - span * ln.direction[1],
        ln.base[2] - span * ln.direction[2],
      ];
      const b: Vec3 = [
        ln.base[0] + span * ln.direction[0],
        ln.base[1] + span * ln.direction[1],
        ln.base[2] + span * ln.direction[2],
      ];
      linesGroup.add(lineFromPoints([a, b], COLORS.symmetry,
                                    `symmetry@${ln.t_star.toFixed(4)}`));
    }
    this.group.add(linesGroup);
    this.applyToggles();
  }

  buildTube(payload: MeshPayload): void {
    const old = this.group.getObjectByName("tube");
    if (old) {
      this.group.remove(old);
      (old as THREE.Mesh).geometry?.dispose?.();
    }
    const geo = new THREE.BufferGeometry();
    geo.setAttribute("position",
      new THREE.Float32BufferAttribute(payload.vertices.flat(), 3));
    geo.setAttribute("normal",
      new THREE.Float32BufferAttribute(payload.normals.flat(), 3));
    geo.setIndex(payload.faces.flat());
    const mat = new THREE.MeshStandardMaterial({
      color: COLORS.tube, transparent: true, opacity: 0.45,
      side: THREE.DoubleSide,
    });
    const mesh = new THREE.Mesh(geo, mat);
    mesh.name = "tube";
    this.group.add(mesh);
    this.applyToggles();
  }

  drawOsculatingCircle(circle: CircleData): void {
    if (this.circleLine) {
      this.group.remove(this.circleLine);
      this.circleLine.geometry.dispose();
    }
    this.circleLine = lineFromPoints(circlePolyline(circle), COLORS.circle,
                                     "osculating");
    this.circleLine.visible = this.toggles.osculating;
    this.group.add(this.circleLine);
  }

  applyToggles(): void {
    const map: Record<string, boolean> = {
      curve: this.toggles.curve,
      evolute: this.toggles.evolute,
      midpoint: this.toggles.midpoint,
      symmetryLines: this.toggles.symmetryLines,
      tube: this.toggles.tube,
      osculating: this.toggles.osculating,
    };
    for (const child of this.group.children) {
      if (child.name in map) {
        child.visible = map[child.name];
      }
    }
  }

  objectNames(): string[] {
    return this.group.children.map((c) => c.name).sort();
  }
}

/** Minimal orbit control: drag rotates, wheel zooms, shift-drag pans. */
export class OrbitCamera {
  camera: THREE.PerspectiveCamera;
  target = new THREE.Vector3(0, 0, 0);
  private theta = 0.5;
  private phi = 1.1;
  private distance = 12;

  constructor(aspect: number, public fovY = 45) {
    this.camera = new THREE.PerspectiveCamera(fovY, aspect, 0.01, 1000);
    this.apply();
  }

  attach(el: HTMLElement): void {
    let dragging = false;
    let panning = false;
    let lastX = 0;
    let lastY = 0;
    el.addEventListener("pointerdown", (e) => {
      dragging = true;
      panning = e.shiftKey;
      lastX = e.clientX;
      lastY = e.clientY;
      el.setPointerCapture(e.pointerId);
    });
    el.addEventListener("pointermove", (e) => {
      if (!dragging) return;
      const dx = e.clientX - lastX;
      const dy = e.clientY - lastY;
      lastX = e.clientX;
      lastY = e.clientY;
      if (panning) {
        const scale = this.distance * 0.0015;
        const right = new THREE.Vector3().setFromMatrixColumn(this.camera.matrix, 0);
        const up = new THREE.Vector3().setFromMatrixColumn(this.camera.matrix, 1);
        this.target.addScaledVector(right, -dx * scale);
        this.target.addScaledVector(up, dy * scale);
      } else {
        this.theta -= dx * 0.008;
        this.phi = Math.min(Math.PI - 0.05, Math.max(0.05, this.phi - dy * 0.008));
      }
      this.apply();
    });
    el.addEventListener("pointerup", () => {
      dragging = false;
    });
    el.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.distance *= Math.exp(e.deltaY * 0.001);
      this.distance = Math.min(400, Math.max(0.1, this.distance));
      this.apply();
    }, { passive: false });
  }

  fit(diameter: number): void {
    this.distance = Math.max(2, diameter * 1.6);
    this.apply();
  }

  apply(): void {
    const sp = Math.sin(this.phi);
    this.camera.position.set(
      this.target.x + this.distance * sp * Math.cos(this.theta),
      this.target.y + this.distance * Math.cos(this.phi),
      this.target.z + this.distance * sp * Math.sin(this.theta),
    );
    this.camera.lookAt(this.target);
    this.camera.updateMatrixWorld();
  }
}
