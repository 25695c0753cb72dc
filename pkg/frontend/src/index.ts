/**
 * TypeScript binding for the turbsim degradation simulator.
 *
 * The binding never links against the Python package: a realization is
 * exported once with `turbsim export-realization`, and this module
 * reproduces `simulate_forward` and `simulate_vjp` from the exported
 * arrays.  Parity with native outputs is gated by the test suite.
 */

import { parseRealization, type RealizationData } from "./realization.js";
import type { RawImage } from "./raw.js";
import type { Protocol } from "./kv.js";
import { svBlur, svBlurAdjoint, tiltWarp, tiltWarpAdjoint } from "./ops.js";

export { FormatError, parseKeyValue, protocolFromKv, protocolToText, requireNumber, requireString } from "./kv.js";
export type { Protocol } from "./kv.js";
export { readRaw, writeRaw } from "./raw.js";
export type { RawImage } from "./raw.js";
export { parseRealization } from "./realization.js";
export type { RealizationData } from "./realization.js";
export * as ops from "./ops.js";

export interface ForwardOptions {
  /** Add the realization's read noise (the native default). */
  withNoise?: boolean;
}

function checkImage(rz: RealizationData, img: RawImage, what: string): void {
  const data: unknown = (img as Partial<RawImage> | null | undefined)?.data;
  if (!(data instanceof Float32Array)) {
    throw new TypeError(
      `${what} must be a RawImage ({height, width, channels, ` +
      `data: Float32Array}), as returned by readRaw`);
  }
  if (img.height !== rz.height || img.width !== rz.width) {
    throw new RangeError(
      `${what} raster ${img.height}x${img.width} does not match ` +
      `realization ${rz.height}x${rz.width}`);
  }
  if (img.channels < 1) {
    throw new RangeError(`${what} must have at least one channel`);
  }
  if (img.data.length !== img.height * img.width * img.channels) {
    throw new RangeError(
      `${what} data length ${img.data.length} does not match its shape`);
  }
}

/**
 * One frozen degradation event, bound to the arrays exported by the
 * native CLI.  Metadata is read-only; `forward` and `vjp` reproduce the
 * native operators on images of the realization's raster.
 */
export class BoundRealization {
  private readonly rz: RealizationData;

  constructor(data: RealizationData) {
    this.rz = data;
  }

  static fromBytes(bytes: Uint8Array): BoundRealization {
    return new BoundRealization(parseRealization(bytes));
  }

  get height(): number { return this.rz.height; }
  get width(): number { return this.rz.width; }
  get kernelCount(): number { return this.rz.kernelCount; }
  get kernelSize(): number { return this.rz.kernelSize; }
  get noiseChannels(): number { return this.rz.noiseChannels; }
  get noiseSigma(): number { return this.rz.noiseSigma; }
  get seed(): bigint { return this.rz.seed; }
  get noiseSeed(): bigint { return this.rz.noiseSeed; }
  get basisHash(): string { return this.rz.basisHash; }
  get protocol(): Protocol { return this.rz.protocol; }

  /** Apply warp, then blur, then optionally add read noise. */
  forward(image: RawImage, options: ForwardOptions = {}): RawImage {
    const rz = this.rz;
    checkImage(rz, image, "image");
    const withNoise = options.withNoise !== false;
    const { height, width, channels } = image;
    if (withNoise && rz.noiseSigma > 0 && channels > rz.noiseChannels) {
      throw new RangeError(
        `image has ${channels} channels but the realization exports ` +
        `${rz.noiseChannels} noise planes`);
    }
    const warped = tiltWarp(image.data, height, width, channels, rz.shifts);
    const blurred = svBlur(warped, height, width, channels, rz.beta,
                           rz.kernels, rz.kernelCount, rz.kernelSize);
    if (withNoise && rz.noiseSigma > 0) {
      const n = height * width;
      for (let i = 0; i < n; i++) {
        for (let ch = 0; ch < channels; ch++) {
          const noise = Math.fround(rz.noise[i * rz.noiseChannels + ch]);
          blurred[i * channels + ch] = Math.fround(
            blurred[i * channels + ch] + rz.noiseSigma * noise);
        }
      }
    }
    return { height, width, channels, data: blurred };
  }

  /**
   * Gradient of <cotangent, forward(image)> with respect to the image:
   * the adjoint chain in reverse order, independent of image and noise.
   */
  vjp(cotangent: RawImage): RawImage {
    const rz = this.rz;
    checkImage(rz, cotangent, "cotangent");
    const { height, width, channels } = cotangent;
    const back = svBlurAdjoint(cotangent.data, height, width, channels,
                               rz.beta, rz.kernels, rz.kernelCount,
                               rz.kernelSize);
    const out = tiltWarpAdjoint(back, height, width, channels, rz.shifts);
    return { height, width, channels, data: out };
  }
}
