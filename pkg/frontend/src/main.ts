/**
 * Explorer app: sliders drive debounced previews, gauges show the two
 * closure residuals, the solve button runs the exact 2-parameter solve in
 * the service, and the viewport renders curve, evolute, midpoint curve,
 * symmetry lines, canal tube, and the osculating-circle sweep.
 */

import * as THREE from "three";

import { Debouncer, ServiceClient, httpFetcher } from "./client.js";
import type {
  CurvePayload, MeshPayload, SetParamsPayload, StatusPayload,
} from "./messages.js";
import { assertCurvePayload } from "./messages.js";
import { SweepClock, circleAtSample } from "./osculating.js";
import { ExplorerScene, OrbitCamera } from "./scene.js";
import { ExplorerState, formatGauge } from "./state.js";

const PREVIEW_SAMPLES = 1024;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

class App {
  state = new ExplorerState();
  client = new ServiceClient(httpFetcher(""));
  scene = new ExplorerScene();
  clock = new SweepClock(240);
  camera: OrbitCamera;
  renderer: THREE.WebGLRenderer;
  payload: CurvePayload | null = null;
  previewDebounce: Debouncer<[]>;
  statusTimer: ReturnType<typeof setInterval> | null = null;
  banner = el<HTMLDivElement>("banner");

  constructor() {
    const canvas = el<HTMLCanvasElement>("view");
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.camera = new OrbitCamera(canvas.clientWidth / canvas.clientHeight);
    this.camera.attach(canvas);
    this.previewDebounce = new Debouncer(() => void this.refreshPreview(), 120);
    this.bindControls();
    this.resize();
    window.addEventListener("resize", () => this.resize());
    requestAnimationFrame((t) => this.frame(t));
  }

  async start(): Promise<void> {
    try {
      await this.client.createSession();
      await this.pushParams();
      await this.refreshPreview();
      this.banner.style.display = "none";
    } catch (err) {
      this.showBanner(`service unreachable: ${(err as Error).message}`);
    }
  }

  showBanner(text: string): void {
    this.banner.textContent = text;
    this.banner.style.display = "block";
  }

  resize(): void {
    const canvas = this.renderer.domElement;
    const w = canvas.clientWidth || canvas.parentElement?.clientWidth || 800;
    const h = canvas.clientHeight || 600;
    this.renderer.setSize(w, h, false);
    this.camera.camera.aspect = w / h;
    this.camera.camera.updateProjectionMatrix();
  }

  bindControls(): void {
    for (const name of ["kappa", "a", "b3"] as const) {
      const slider = el<HTMLInputElement>(`slider-${name}`);
      const box = el<HTMLInputElement>(`num-${name}`);
      const apply = (value: number) => {
        const clamped = this.state.setParam(name, value);
        slider.value = String(clamped);
        box.value = String(clamped);
        this.markStale();
        this.previewDebounce.fire();
      };
      slider.addEventListener("input", () => apply(Number(slider.value)));
      box.addEventListener("change", () => apply(Number(box.value)));
    }
    el<HTMLSelectElement>("form-select").addEventListener("change", (e) => {
      this.state.params.form =
        (e.target as HTMLSelectElement).value as "sqrt" | "exp";
      this.markStale();
      this.previewDebounce.fire();
    });
    el<HTMLSelectElement>("target-select").addEventListener("change", (e) => {
      const [p, q] = (e.target as HTMLSelectElement).value.split("/").map(Number);
      this.state.params.target = { p, q };
      this.markStale();
      this.previewDebounce.fire();
    });
    el<HTMLButtonElement>("solve-btn").addEventListener("click",
      () => void this.onSolveClick());
    el<HTMLButtonElement>("family-btn").addEventListener("click",
      () => void this.onFamilyClick());
    el<HTMLInputElement>("family-scrub").addEventListener("input", (e) => {
      const member = this.state.scrubFamily(Number((e.target as HTMLInputElement).value));
      if (member) {
        this.syncParamInputs();
        this.markStale();
        this.previewDebounce.fire(); // preview only; scrubbing never re-solves
      }
    });
    for (const key of ["curve", "evolute", "midpoint", "symmetryLines", "tube",
                       "osculating"] as const) {
      el<HTMLInputElement>(`toggle-${key}`).addEventListener("change", (e) => {
        this.scene.toggles[key] = (e.target as HTMLInputElement).checked;
        this.scene.applyToggles();
        if (key === "tube" && this.scene.toggles.tube) {
          void this.refreshTube();
        }
      });
    }
    el<HTMLButtonElement>("anim-btn").addEventListener("click", () => {
      if (this.clock.running) {
        this.clock.pause();
        el<HTMLButtonElement>("anim-btn").textContent = "▶ sweep";
      } else {
        this.clock.start();
        el<HTMLButtonElement>("anim-btn").textContent = "⏸ sweep";
      }
    });
    el<HTMLButtonElement>("export-btn").addEventListener("click",
      () => this.exportDocument());
    el<HTMLInputElement>("load-input").addEventListener("change",
      (e) => void this.loadDocument(e));
  }

  syncParamInputs(): void {
    for (const name of ["kappa", "a", "b3"] as const) {
      el<HTMLInputElement>(`slider-${name}`).value = String(this.state.params[name]);
      el<HTMLInputElement>(`num-${name}`).value =
        String(Number(this.state.params[name].toFixed(6)));
    }
  }

  markStale(): void {
    el<HTMLDivElement>("stale-marker").style.display = "inline";
  }

  async pushParams(): Promise<void> {
    const resp = await this.client.sequenced<SetParamsPayload>(
      "params", "set_params", { ...this.state.params });
    if (resp) {
      this.state.applySetParamsResponse(resp);
      this.renderGauges();
    }
  }

  async refreshPreview(): Promise<void> {
    try {
      await this.pushParams();
      const payload = await this.client.sequenced<CurvePayload>(
        "preview", "get_curve", { samples: PREVIEW_SAMPLES });
      if (!payload) return; // superseded by a newer request
      this.payload = assertCurvePayload(payload);
      this.scene.buildFromCurve(this.payload);
      this.camera.fit(this.payload.diameter);
      if (this.scene.toggles.tube) {
        await this.refreshTube();
      }
      el<HTMLDivElement>("stale-marker").style.display = "none";
      this.banner.style.display = "none";
    } catch (err) {
      this.showBanner(`preview failed: ${(err as Error).message}`);
    }
  }

  async refreshTube(): Promise<void> {
    const mesh = await this.client.sequenced<MeshPayload>(
      "mesh", "get_mesh", { ring_size: 32, samples: 512 });
    if (mesh) {
      this.scene.buildTube(mesh);
      el<HTMLDivElement>("tube-warning").style.display =
        mesh.radius_warning ? "block" : "none";
    }
  }

  renderGauges(): void {
    el<HTMLSpanElement>("gauge-d").textContent = formatGauge(this.state.gauges.d);
    el<HTMLSpanElement>("gauge-angle").textContent =
      formatGauge(this.state.gauges.angleDefect);
    el<HTMLSpanElement>("gauge-norm").textContent =
      formatGauge(this.state.gauges.norm);
    const ready = el<HTMLSpanElement>("ready-indicator");
    ready.textContent = this.state.gauges.solverReady
      ? "solver ready" : "rough-close first";
    ready.className = this.state.gauges.solverReady ? "ready" : "not-ready";
    el<HTMLButtonElement>("solve-btn").disabled = !this.state.solveEnabled();
    el<HTMLButtonElement>("family-btn").disabled =
      this.state.solverState === "running" || !this.state.lastResult?.converged;
  }

  async onSolveClick(): Promise<void> {
    if (!this.state.solveEnabled()) return; // gate: never reaches the service
    try {
      await this.client.request("solve");
      this.state.solverState = "running";
      this.renderGauges();
      this.pollStatus();
    } catch (err) {
      this.showBanner(`solve rejected: ${(err as Error).message}`);
    }
  }

  async onFamilyClick(): Promise<void> {
    const b3min = Number(el<HTMLInputElement>("family-min").value);
    const b3max = Number(el<HTMLInputElement>("family-max").value);
    const step = Number(el<HTMLInputElement>("family-step").value);
    try {
      await this.client.request("get_family",
        { b3_min: b3min, b3_max: b3max, step });
      this.state.solverState = "running";
      this.renderGauges();
      this.pollStatus();
    } catch (err) {
      this.showBanner(`family rejected: ${(err as Error).message}`);
    }
  }

  pollStatus(): void {
    if (this.statusTimer) clearInterval(this.statusTimer);
    this.statusTimer = setInterval(async () => {
      const status = await this.client.sequenced<StatusPayload>("status", "status");
      if (!status) return;
      this.state.applyStatus(status.state, status.result, status.family);
      this.drawTrace(status.trace);
      el<HTMLSpanElement>("solver-state").textContent =
        status.state + (status.reason ? `: ${status.reason}` : "");
      if (status.family.length) {
        const scrub = el<HTMLInputElement>("family-scrub");
        scrub.max = String(status.family.length - 1);
        scrub.disabled = false;
      }
      if (status.state !== "running") {
        if (this.statusTimer) clearInterval(this.statusTimer);
        this.statusTimer = null;
        if (status.state === "done" && this.state.finalResidual !== null) {
          // display the exact number the service reported
          el<HTMLSpanElement>("final-residual").textContent =
            String(this.state.finalResidual);
          if (status.result) {
            this.state.params.kappa = status.result.kappa;
            this.state.params.a = status.result.a;
            this.state.params.b3 = status.result.b3;
            this.syncParamInputs();
          }
          await this.refreshPreview();
        }
        this.renderGauges();
      }
    }, 250);
  }

  drawTrace(trace: [number, number, number, number, number][]): void {
    const canvas = el<HTMLCanvasElement>("trace");
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    if (!trace.length) return;
    const norms = trace.map((e) => Math.max(e[4], 1e-16));
    const logs = norms.map((n) => Math.log10(n));
    const lo = Math.min(...logs, -11);
    const hi = Math.max(...logs, 0);
    ctx.strokeStyle = "#2b6fd4";
    ctx.beginPath();
    logs.forEach((v, i) => {
      const x = (i / Math.max(1, logs.length - 1)) * (canvas.width - 10) + 5;
      const y = ((hi - v) / (hi - lo)) * (canvas.height - 10) + 5;
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }

  exportDocument(): void {
    if (!this.payload) return;
    const doc = {
      params: { ...this.state.params },
      residuals: {
        d: this.state.gauges.d,
        angle_defect: this.state.gauges.angleDefect,
      },
      solve: this.state.lastResult,
      curve_preview: { samples: this.payload.t.length },
    };
    const blob = new Blob([JSON.stringify(doc, null, 1)],
                          { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "autoevolute-session.json";
    a.click();
    URL.revokeObjectURL(a.href);
  }

  async loadDocument(e: Event): Promise<void> {
    const input = e.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      const doc = JSON.parse(await file.text());
      const p = doc.params ?? {};
      if (typeof p.kappa === "number") this.state.params.kappa = p.kappa;
      if (typeof p.a === "number") this.state.params.a = p.a;
      if (typeof p.b3 === "number") this.state.params.b3 = p.b3;
      if (p.form === "sqrt" || p.form === "exp") this.state.params.form = p.form;
      if (doc.target?.p && doc.target?.q) {
        this.state.params.target = { p: doc.target.p, q: doc.target.q };
      }
      this.syncParamInputs();
      await this.refreshPreview();
    } catch (err) {
      this.showBanner(`could not load document: ${(err as Error).message}`);
    }
  }

  frame(nowMs: number): void {
    if (this.payload && this.scene.toggles.osculating) {
      const idx = this.clock.tick(nowMs, this.payload.t.length);
      this.scene.drawOsculatingCircle(circleAtSample(this.payload, idx));
    }
    this.renderer.render(this.scene.scene, this.camera.camera);
    requestAnimationFrame((t) => this.frame(t));
  }
}

const app = new App();
void app.start();
