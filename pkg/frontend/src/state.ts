/** Explorer UI state: model selection, latent sliders, query, lead toggles. */

export const Z_MIN = -3;
export const Z_MAX = 3;

export const LEAD_NAMES = ["I", "II", "V1", "V2", "V3", "V4", "V5", "V6"];

/** The standard query grid; the current query slider value is appended to it. */
export const QUERY_GRID = [0, 0.2, 0.4, 0.6, 0.8, 1];

export interface ExplorerState {
  vaeId: string;
  clfId: string;
  qlstId: string;
  z: number[];
  q: number;
  leads: boolean[];
}

export function clamp(value: number, lo = Z_MIN, hi = Z_MAX): number {
  if (!Number.isFinite(value)) return 0;
  return Math.min(hi, Math.max(lo, value));
}

export function initialState(latentDim: number): ExplorerState {
  return {
    vaeId: "",
    clfId: "",
    qlstId: "",
    z: new Array(latentDim).fill(0),
    q: 1,
    leads: LEAD_NAMES.map(() => true),
  };
}

/** Sets one latent slider, clamping into [Z_MIN, Z_MAX]. */
export function setZ(state: ExplorerState, index: number, value: number): ExplorerState {
  const z = state.z.slice();
  if (index >= 0 && index < z.length) z[index] = clamp(value);
  return { ...state, z };
}

export function setQuery(state: ExplorerState, q: number): ExplorerState {
  return { ...state, q: clamp(q, 0, 1) };
}

/** Resizes z to the selected VAE's latent_dim, padding new dims with 0. */
export function setVae(state: ExplorerState, vaeId: string, latentDim: number): ExplorerState {
  let z = state.z;
  if (z.length !== latentDim) {
    z = new Array(latentDim).fill(0);
    for (let i = 0; i < Math.min(state.z.length, latentDim); i++) z[i] = state.z[i];
  }
  return { ...state, vaeId, z };
}

/** Switching classifier must not touch the sliders; only the selection changes. */
export function setClassifier(state: ExplorerState, clfId: string): ExplorerState {
  return { ...state, clfId };
}

export function setQlst(state: ExplorerState, qlstId: string): ExplorerState {
  return { ...state, qlstId };
}

export function toggleLead(state: ExplorerState, index: number): ExplorerState {
  const leads = state.leads.slice();
  if (index >= 0 && index < leads.length) leads[index] = !leads[index];
  return { ...state, leads };
}

/** Queries issued for the overlay: the standard grid plus the slider's q. */
export function traversalQueries(state: ExplorerState): number[] {
  const qs = QUERY_GRID.slice();
  if (!qs.some((v) => Math.abs(v - state.q) < 1e-9)) qs.push(state.q);
  return qs;
}

const HASH_VERSION = "1";

/** Encodes the state into a URL hash fragment (leading "#"). */
export function encodeHash(state: ExplorerState): string {
  const params = new URLSearchParams();
  params.set("v", HASH_VERSION);
  if (state.vaeId) params.set("vae", state.vaeId);
  if (state.clfId) params.set("clf", state.clfId);
  if (state.qlstId) params.set("qlst", state.qlstId);
  params.set("z", state.z.map((v) => String(v)).join(","));
  params.set("q", String(state.q));
  params.set("leads", state.leads.map((on) => (on ? "1" : "0")).join(""));
  return "#" + params.toString();
}

/**
 * Decodes a URL hash back into a state. Returns null for unrecognized or
 * malformed hashes so callers fall back to the initial state.
 */
export function decodeHash(hash: string, defaultLatentDim: number): ExplorerState | null {
  const raw = hash.startsWith("#") ? hash.slice(1) : hash;
  if (!raw) return null;
  const params = new URLSearchParams(raw);
  if (params.get("v") !== HASH_VERSION) return null;
  const state = initialState(defaultLatentDim);
  state.vaeId = params.get("vae") ?? "";
  state.clfId = params.get("clf") ?? "";
  state.qlstId = params.get("qlst") ?? "";
  const zRaw = params.get("z");
  if (zRaw) {
    const raw = zRaw.split(",").map(Number);
    if (raw.some((v) => Number.isNaN(v))) return null;
    state.z = raw.map((v) => clamp(v));
  }
  const qRaw = params.get("q");
  if (qRaw !== null) {
    const q = Number(qRaw);
    if (Number.isNaN(q)) return null;
    state.q = clamp(q, 0, 1);
  }
  const leadsRaw = params.get("leads");
  if (leadsRaw && leadsRaw.length === LEAD_NAMES.length) {
    state.leads = [...leadsRaw].map((c) => c === "1");
  }
  return state;
}
