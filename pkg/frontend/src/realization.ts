/**
 * Parser for `TBRZ` realization exports (CLI `export-realization`).
 *
 * One export freezes everything a foreign-language consumer needs to
 * reproduce the native forward operator and its adjoint: the per-pixel
 * tilt shifts, the kernel-basis weights, the kernel bank itself, and
 * the unit-variance noise planes, all as little-endian float64, plus
 * the protocol text and the seeds/hash needed for provenance checks.
 */

import { FormatError, parseKeyValue, protocolFromKv, type Protocol } from "./kv.js";

const MAGIC = 0x5a524254; // "TBRZ" little-endian
const VERSION = 1;

export interface RealizationData {
  readonly height: number;
  readonly width: number;
  /** Number of basis kernels (K). */
  readonly kernelCount: number;
  /** Kernel support size (odd s; kernels are s by s). */
  readonly kernelSize: number;
  /** Independent read-noise planes stored in the export. */
  readonly noiseChannels: number;
  readonly noiseSigma: number;
  /** Field seed; a full unsigned 64-bit value, hence bigint. */
  readonly seed: bigint;
  readonly noiseSeed: bigint;
  readonly basisHash: string;
  readonly protocol: Protocol;
  /** (H, W, 2) row/column sampling offsets in pixels. */
  readonly shifts: Float64Array;
  /** (H, W, K) kernel weights. */
  readonly beta: Float64Array;
  /** (K, s, s) kernel bank. */
  readonly kernels: Float64Array;
  /** (H, W, C) unit-variance noise. */
  readonly noise: Float64Array;
}

export function parseRealization(bytes: Uint8Array): RealizationData {
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const need = (n: number, what: string) => {
    if (bytes.byteLength < n) {
      throw new FormatError(`realization export: truncated ${what}`);
    }
  };
  need(8, "header");
  if (view.getUint32(0, true) !== MAGIC) {
    throw new FormatError("realization export: bad magic");
  }
  const version = view.getUint32(4, true);
  if (version !== VERSION) {
    throw new FormatError(
      `realization export: unsupported version ${version}`);
  }
  need(60, "header");
  const height = view.getUint32(12, true);
  const width = view.getUint32(16, true);
  const kernelCount = view.getUint32(20, true);
  const kernelSize = view.getUint32(24, true);
  const noiseChannels = view.getUint32(28, true);
  const noiseSigma = view.getFloat64(32, true);
  const seed = view.getBigUint64(40, true);
  const noiseSeed = view.getBigUint64(48, true);

  let off = 56;
  const hashLen = view.getUint32(off, true);
  off += 4;
  need(off + hashLen, "basis hash");
  const basisHash = new TextDecoder("ascii").decode(
    bytes.subarray(off, off + hashLen));
  off += hashLen;
  need(off + 4, "protocol length");
  const protoLen = view.getUint32(off, true);
  off += 4;
  need(off + protoLen, "protocol text");
  const protocolText = new TextDecoder("utf-8").decode(
    bytes.subarray(off, off + protoLen));
  off += protoLen;
  const protocol = protocolFromKv(parseKeyValue(protocolText));
  if (protocol.image_height_px !== height || protocol.image_width_px !== width) {
    throw new FormatError(
      "realization export: protocol raster does not match array shapes");
  }

  const readF64 = (count: number, what: string): Float64Array => {
    need(off + 8 * count, what);
    const arr = new Float64Array(count);
    for (let i = 0; i < count; i++) {
      arr[i] = view.getFloat64(off + 8 * i, true);
    }
    off += 8 * count;
    return arr;
  };
  const shifts = readF64(height * width * 2, "shift field");
  const beta = readF64(height * width * kernelCount, "kernel weights");
  const kernels = readF64(kernelCount * kernelSize * kernelSize, "kernels");
  const noise = readF64(height * width * noiseChannels, "noise planes");
  if (off !== bytes.byteLength) {
    throw new FormatError("realization export: trailing bytes");
  }
  return {
    height, width, kernelCount, kernelSize, noiseChannels, noiseSigma,
    seed, noiseSeed, basisHash, protocol, shifts, beta, kernels, noise,
  };
}
