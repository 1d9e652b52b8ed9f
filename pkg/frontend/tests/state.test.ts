import { describe, expect, it } from "vitest";
import {
  clamp,
  decodeHash,
  encodeHash,
  initialState,
  LEAD_NAMES,
  QUERY_GRID,
  setClassifier,
  setQuery,
  setVae,
  setZ,
  toggleLead,
  traversalQueries,
} from "../src/state";

describe("ExplorerState", () => {
  it("starts with all sliders at zero", () => {
    const s = initialState(16);
    expect(s.z).toEqual(new Array(16).fill(0));
    expect(s.leads).toHaveLength(LEAD_NAMES.length);
    expect(s.leads.every(Boolean)).toBe(true);
  });

  it("clamps slider values into [-3, 3]", () => {
    let s = initialState(4);
    s = setZ(s, 0, 5);
    s = setZ(s, 1, -99);
    s = setZ(s, 2, 1.25);
    expect(s.z).toEqual([3, -3, 1.25, 0]);
    expect(clamp(Number.NaN)).toBe(0);
  });

  it("clamps the query into [0, 1]", () => {
    const s = setQuery(initialState(2), 1.7);
    expect(s.q).toBe(1);
    expect(setQuery(s, -0.2).q).toBe(0);
  });

  it("tracks the selected VAE's latent_dim, preserving overlapping dims", () => {
    let s = initialState(4);
    s = setZ(s, 1, 2);
    s = setVae(s, "vae-ckpt/big", 6);
    expect(s.z).toEqual([0, 2, 0, 0, 0, 0]);
    s = setVae(s, "vae-ckpt/small", 3);
    expect(s.z).toEqual([0, 2, 0]);
  });

  it("keeps sliders unchanged when the classifier switches", () => {
    let s = initialState(4);
    s = setZ(s, 0, -1.5);
    const after = setClassifier(s, "clf-ckpt/other");
    expect(after.clfId).toBe("clf-ckpt/other");
    expect(after.z).toEqual(s.z);
    expect(after.q).toBe(s.q);
  });

  it("appends the slider q to the standard grid without duplicates", () => {
    const s = setQuery(initialState(2), 0.5);
    expect(traversalQueries(s)).toEqual([...QUERY_GRID, 0.5]);
    const onGrid = setQuery(initialState(2), 0.4);
    expect(traversalQueries(onGrid)).toEqual(QUERY_GRID);
  });

  it("round trips through the URL hash", () => {
    let s = initialState(16);
    s.vaeId = "vae-ckpt/1";
    s.clfId = "clf-ckpt/resnet";
    s.qlstId = "qlst-ckpt/1";
    s = setZ(s, 3, -2.25);
    s = setZ(s, 7, 0.5);
    s = setQuery(s, 0.8);
    s = toggleLead(s, 2);
    const hash = encodeHash(s);
    const back = decodeHash(hash, 16);
    expect(back).toEqual(s);
  });

  it("rejects malformed hashes", () => {
    expect(decodeHash("", 16)).toBeNull();
    expect(decodeHash("#v=999&z=0", 16)).toBeNull();
    expect(decodeHash("#v=1&z=a,b", 16)).toBeNull();
  });

  it("clamps out-of-range hash values on decode", () => {
    const back = decodeHash("#v=1&z=9,-9&q=4", 16)!;
    expect(back.z).toEqual([3, -3]);
    expect(back.q).toBe(1);
  });
});
