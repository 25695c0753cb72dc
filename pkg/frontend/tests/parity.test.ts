import { readFileSync } from "node:fs";
import path from "node:path";
import { fileURLToPath } from "node:url";

import { beforeAll, describe, expect, it } from "vitest";

import { BoundRealization, parseKeyValue, readRaw, requireNumber, requireString } from "../src/index.js";
import type { RawImage } from "../src/raw.js";

const FIXTURES = path.join(path.dirname(fileURLToPath(import.meta.url)),
                           ".fixtures");
const PARITY = 1e-6;

let rz: BoundRealization;

function fixture(name: string): Uint8Array {
  return readFileSync(path.join(FIXTURES, name));
}

function raw(name: string): RawImage {
  return readRaw(fixture(name));
}

function maxAbsDiff(a: Float32Array, b: Float32Array): number {
  expect(a.length).toBe(b.length);
  let worst = 0;
  for (let i = 0; i < a.length; i++) {
    worst = Math.max(worst, Math.abs(a[i] - b[i]));
  }
  return worst;
}

beforeAll(() => {
  rz = BoundRealization.fromBytes(fixture("rz.tbrz"));
});

describe("metadata round trip", () => {
  it("equals the values the exporter reported", () => {
    const kv = parseKeyValue(readFileSync(
      path.join(FIXTURES, "export_kv.txt"), "utf-8"));
    expect(rz.seed).toBe(BigInt(requireString(kv, "seed")));
    expect(rz.noiseSeed).toBe(BigInt(requireString(kv, "noise_seed")));
    expect(rz.basisHash).toBe(requireString(kv, "basis_hash"));
    expect(rz.height).toBe(requireNumber(kv, "height"));
    expect(rz.width).toBe(requireNumber(kv, "width"));
    expect(rz.kernelCount).toBe(requireNumber(kv, "k"));
    expect(rz.kernelSize).toBe(requireNumber(kv, "s"));
    expect(rz.noiseChannels).toBe(requireNumber(kv, "channels"));
  });

  it("exposes the protocol read-only", () => {
    expect(rz.protocol.cn2).toBe(3.5e-15);
    expect(rz.protocol.noise_sigma).toBe(0.01);
    expect(rz.protocol.image_width_px).toBe(24);
    expect(Object.isFrozen(rz.protocol)).toBe(true);
  });
});

describe("forward parity with the native CLI", () => {
  it("matches degrade on an RGB image with noise", () => {
    const out = rz.forward(raw("clean_rgb.raw"));
    const diff = maxAbsDiff(out.data, raw("fwd_rgb.raw").data);
    console.log(`forward rgb+noise max abs diff: ${diff.toExponential(3)}`);
    expect(diff).toBeLessThanOrEqual(PARITY);
  });

  it("matches degrade with noise disabled", () => {
    const out = rz.forward(raw("clean_rgb.raw"), { withNoise: false });
    const diff = maxAbsDiff(out.data, raw("fwd_rgb_nn.raw").data);
    console.log(`forward rgb no-noise max abs diff: ${diff.toExponential(3)}`);
    expect(diff).toBeLessThanOrEqual(PARITY);
  });

  it("matches degrade on a grayscale image", () => {
    const out = rz.forward(raw("clean_gray.raw"));
    const diff = maxAbsDiff(out.data, raw("fwd_gray.raw").data);
    console.log(`forward gray max abs diff: ${diff.toExponential(3)}`);
    expect(diff).toBeLessThanOrEqual(PARITY);
  });
});

describe("vjp parity with the native CLI", () => {
  it("matches the native adjoint chain", () => {
    const out = rz.vjp(raw("cot_rgb.raw"));
    const diff = maxAbsDiff(out.data, raw("native_vjp.raw").data);
    console.log(`vjp max abs diff: ${diff.toExponential(3)}`);
    expect(diff).toBeLessThanOrEqual(PARITY);
  });
});

describe("dataset sample replay", () => {
  it("reproduces a stored sample from its sidecar realization", () => {
    const sidecar = parseKeyValue(readFileSync(
      path.join(FIXTURES, "dataset", "000000.sidecar.txt"), "utf-8"));
    const sample = BoundRealization.fromBytes(fixture("rz_ds.tbrz"));
    expect(sample.seed).toBe(BigInt(requireString(sidecar, "field_seed")));
    expect(sample.noiseSeed)
      .toBe(BigInt(requireString(sidecar, "noise_seed")));
    expect(sample.basisHash).toBe(requireString(sidecar, "basis_hash"));
    expect(sample.protocol.cn2).toBe(requireNumber(sidecar, "cn2"));
    expect(sample.protocol.noise_sigma)
      .toBe(requireNumber(sidecar, "noise_sigma"));

    const clean = readRaw(readFileSync(path.join(
      FIXTURES, "dataset", requireString(sidecar, "clean_raw"))));
    const stored = readRaw(readFileSync(path.join(
      FIXTURES, "dataset", requireString(sidecar, "degraded_raw"))));
    const replay = sample.forward(clean);
    const diff = maxAbsDiff(replay.data, stored.data);
    console.log(`dataset replay max abs diff: ${diff.toExponential(3)}`);
    expect(diff).toBeLessThanOrEqual(PARITY);
  });
});
