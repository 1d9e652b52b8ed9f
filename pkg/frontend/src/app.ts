/** DOM wiring for the explorer: sliders -> service calls -> waveform panels. */

import {
  LatestWins,
  ServiceClient,
  type ModelInfo,
  type TraverseBundle,
} from "./api.js";
import {
  decodeHash,
  encodeHash,
  initialState,
  setClassifier,
  setQlst,
  setQuery,
  setVae,
  setZ,
  toggleLead,
  traversalQueries,
  type ExplorerState,
} from "./state.js";
import { colorForQuery, leadPath, splitLeads } from "./waveform.js";

const LEAD_W = 600;
const LEAD_H = 160;

export function startApp(root: HTMLElement, client: ServiceClient): void {
  new ExplorerApp(root, client).init();
}

const DEFAULT_LATENT_DIM = 16;

class ExplorerApp {
  private state: ExplorerState = initialState(DEFAULT_LATENT_DIM);
  private models: ModelInfo[] = [];
  private readonly decodeGate = new LatestWins<number[]>();
  private readonly traverseGate = new LatestWins<TraverseBundle>();
  private lastSignal: number[] | null = null;
  private lastBundle: TraverseBundle | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ServiceClient,
  ) {}

  async init(): Promise<void> {
    this.buildSkeleton();
    const fromHash = decodeHash(window.location.hash, DEFAULT_LATENT_DIM);
    if (fromHash) this.state = fromHash;
    try {
      const { models } = await this.client.listModels();
      this.models = models.filter((m) => m.status === "ok");
      this.applyModelDefaults();
    } catch (err) {
      this.showError(`cannot reach service: ${String(err)}`);
    }
    this.renderControls();
    void this.refreshDecode();
  }

  private applyModelDefaults(): void {
    const first = (kind: string) => this.models.find((m) => m.kind === kind)?.id ?? "";
    if (!this.state.vaeId) this.state.vaeId = first("vae");
    if (!this.state.clfId) this.state.clfId = first("classifier");
    if (!this.state.qlstId) this.state.qlstId = first("qlst");
    const vae = this.models.find((m) => m.id === this.state.vaeId);
    const dim = vae ? Number(vae.config["latent_dim"] ?? DEFAULT_LATENT_DIM) : DEFAULT_LATENT_DIM;
    this.state = setVae(this.state, this.state.vaeId, dim);
  }

  private buildSkeleton(): void {
    this.root.innerHTML = `
      <div id="banner" class="banner" hidden></div>
      <div class="layout">
        <aside id="controls"></aside>
        <main>
          <section id="waveforms"></section>
          <section id="probs"></section>
        </main>
      </div>`;
  }

  private el<T extends HTMLElement>(id: string): T {
    return this.root.querySelector(`#${id}`) as T;
  }

  private showError(message: string): void {
    const banner = this.el<HTMLDivElement>("banner");
    banner.hidden = false;
    banner.textContent = message;
  }

  private clearError(): void {
    this.el<HTMLDivElement>("banner").hidden = true;
  }

  private syncHash(): void {
    history.replaceState(null, "", encodeHash(this.state));
  }

  private renderControls(): void {
    const controls = this.el<HTMLElement>("controls");
    controls.innerHTML = "";
    controls.appendChild(this.modelSelect("vae", "VAE", this.state.vaeId));
    controls.appendChild(this.modelSelect("classifier", "Classifier", this.state.clfId));
    controls.appendChild(this.modelSelect("qlst", "qLST", this.state.qlstId));
    const zBox = document.createElement("div");
    this.state.z.forEach((value, i) => {
      zBox.appendChild(
        this.slider(`z${i}`, `z[${i}]`, value, -3, 3, (v) => {
          this.state = setZ(this.state, i, v);
          this.syncHash();
          void this.refreshDecode();
        }),
      );
    });
    controls.appendChild(zBox);
    controls.appendChild(
      this.slider("q", "query q", this.state.q, 0, 1, (v) => {
        this.state = setQuery(this.state, v);
        this.syncHash();
        void this.refreshTraverse();
      }),
    );
    const leadBox = document.createElement("div");
    this.state.leads.forEach((on, i) => {
      const label = document.createElement("label");
      const cb = document.createElement("input");
      cb.type = "checkbox";
      cb.checked = on;
      cb.addEventListener("change", () => {
        this.state = toggleLead(this.state, i);
        this.syncHash();
        this.renderWaveforms();
      });
      label.append(cb, ` lead ${i}`);
      leadBox.appendChild(label);
    });
    controls.appendChild(leadBox);
  }

  private modelSelect(kind: string, title: string, selected: string): HTMLElement {
    const wrap = document.createElement("label");
    wrap.textContent = title + " ";
    const select = document.createElement("select");
    for (const m of this.models.filter((x) => x.kind === kind)) {
      const opt = document.createElement("option");
      opt.value = m.id;
      opt.textContent = m.id;
      opt.selected = m.id === selected;
      select.appendChild(opt);
    }
    select.addEventListener("change", () => {
      if (kind === "vae") {
        const m = this.models.find((x) => x.id === select.value);
        const dim = Number(m?.config["latent_dim"] ?? DEFAULT_LATENT_DIM);
        this.state = setVae(this.state, select.value, dim);
        this.renderControls();
        void this.refreshDecode();
      } else if (kind === "classifier") {
        this.state = setClassifier(this.state, select.value);
        this.el<HTMLElement>("probs").innerHTML = "";
        void this.refreshDecode();
      } else {
        this.state = setQlst(this.state, select.value);
        void this.refreshTraverse();
      }
      this.syncHash();
    });
    wrap.appendChild(select);
    return wrap;
  }

  private slider(
    id: string,
    title: string,
    value: number,
    min: number,
    max: number,
    onInput: (v: number) => void,
  ): HTMLElement {
    const wrap = document.createElement("label");
    wrap.textContent = title + " ";
    const input = document.createElement("input");
    input.type = "range";
    input.id = id;
    input.min = String(min);
    input.max = String(max);
    input.step = "0.01";
    input.value = String(value);
    input.addEventListener("input", () => onInput(Number(input.value)));
    wrap.appendChild(input);
    return wrap;
  }

  private async refreshDecode(): Promise<void> {
    if (!this.state.vaeId) return;
    const z = this.state.z.slice();
    try {
      const signal = await this.decodeGate.issue(async () => {
        const res = await this.client.decode(this.state.vaeId, z);
        return res.signal;
      });
      if (signal === null) return; // superseded by a newer slider value
      this.lastSignal = signal;
      this.clearError();
      this.renderWaveforms();
      void this.refreshProbs(signal);
    } catch (err) {
      this.showError(`decode failed: ${String(err)}`);
    }
  }

  private async refreshProbs(signal: number[]): Promise<void> {
    if (!this.state.clfId) return;
    try {
      const { probs } = await this.client.classify(this.state.clfId, signal);
      const box = this.el<HTMLElement>("probs");
      box.innerHTML =
        "<h3>P(class | signal)</h3>" +
        Object.entries(probs)
          .map(([k, v]) => `<div>${k}: ${v.toFixed(3)}</div>`)
          .join("");
    } catch (err) {
      this.showError(`classify failed: ${String(err)}`);
    }
  }

  private async refreshTraverse(): Promise<void> {
    if (!this.state.qlstId) return;
    const origin = this.state.z.every((v) => v === 0)
      ? ({ zero: true } as const)
      : ({ z: this.state.z.slice() } as const);
    const queries = traversalQueries(this.state);
    try {
      const bundle = await this.traverseGate.issue(() =>
        this.client.traverse(this.state.qlstId, origin, queries),
      );
      if (bundle === null) return;
      this.lastBundle = bundle;
      this.clearError();
      this.renderWaveforms();
    } catch (err) {
      this.showError(`traverse failed: ${String(err)}`);
    }
  }

  private renderWaveforms(): void {
    const box = this.el<HTMLElement>("waveforms");
    box.innerHTML = "";
    const overlays: Array<{ signal: number[]; color: string; label: string }> = [];
    if (this.lastSignal) {
      overlays.push({ signal: this.lastSignal, color: "#222222", label: "z" });
    }
    if (this.lastBundle) {
      for (const step of this.lastBundle.steps) {
        overlays.push({
          signal: step.signal,
          color: colorForQuery(step.query),
          label: `q=${step.query}`,
        });
      }
    }
    if (overlays.length === 0) return;
    this.state.leads.forEach((on, leadIdx) => {
      if (!on) return;
      const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
      svg.setAttribute("width", String(LEAD_W));
      svg.setAttribute("height", String(LEAD_H));
      for (const { signal, color } of overlays) {
        const lead = splitLeads(signal)[leadIdx];
        const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
        path.setAttribute("d", leadPath(lead, LEAD_W, LEAD_H));
        path.setAttribute("stroke", color);
        path.setAttribute("fill", "none");
        svg.appendChild(path);
      }
      box.appendChild(svg);
    });
  }
}
