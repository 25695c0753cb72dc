/**
 * Image-domain operators matching the native simulator's numerics.
 *
 * The native pipeline follows the image dtype: float32 in, float32 out,
 * with float64 arithmetic inside each stage and a float32 round at
 * every stage boundary.  This port reproduces those boundaries with
 * `Math.fround`, so the only divergence from native output is the
 * native FFT's own float32 rounding; direct float64 convolution here
 * stays within ~1e-6 of it on realistic data.
 *
 * All functions take flat row-major, channel-interleaved arrays.
 */

/** Bilinear backward warp; out-of-frame samples clamp to the edge. */
export function tiltWarp(
  img: Float32Array, height: number, width: number, channels: number,
  shifts: Float64Array,
): Float32Array {
  const out = new Float32Array(img.length);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const i = y * width + x;
      let sy = y + shifts[2 * i];
      let sx = x + shifts[2 * i + 1];
      if (sy < 0) sy = 0; else if (sy > height - 1) sy = height - 1;
      if (sx < 0) sx = 0; else if (sx > width - 1) sx = width - 1;
      const y0 = Math.min(Math.floor(sy), height - 2);
      const x0 = Math.min(Math.floor(sx), width - 2);
      const wy = sy - y0;
      const wx = sx - x0;
      const a = (1 - wy) * (1 - wx);
      const b = (1 - wy) * wx;
      const c = wy * (1 - wx);
      const d = wy * wx;
      const p00 = (y0 * width + x0) * channels;
      const p01 = p00 + channels;
      const p10 = p00 + width * channels;
      const p11 = p10 + channels;
      for (let ch = 0; ch < channels; ch++) {
        out[i * channels + ch] = Math.fround(
          a * img[p00 + ch] + b * img[p01 + ch]
          + c * img[p10 + ch] + d * img[p11 + ch]);
      }
    }
  }
  return out;
}

/** Exact transpose of {@link tiltWarp} at the same shift field. */
export function tiltWarpAdjoint(
  cot: Float32Array, height: number, width: number, channels: number,
  shifts: Float64Array,
): Float32Array {
  const acc = new Float64Array(cot.length);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const i = y * width + x;
      let sy = y + shifts[2 * i];
      let sx = x + shifts[2 * i + 1];
      if (sy < 0) sy = 0; else if (sy > height - 1) sy = height - 1;
      if (sx < 0) sx = 0; else if (sx > width - 1) sx = width - 1;
      const y0 = Math.min(Math.floor(sy), height - 2);
      const x0 = Math.min(Math.floor(sx), width - 2);
      const wy = sy - y0;
      const wx = sx - x0;
      const a = (1 - wy) * (1 - wx);
      const b = (1 - wy) * wx;
      const c = wy * (1 - wx);
      const d = wy * wx;
      const p00 = (y0 * width + x0) * channels;
      const p01 = p00 + channels;
      const p10 = p00 + width * channels;
      const p11 = p10 + channels;
      for (let ch = 0; ch < channels; ch++) {
        const v = cot[i * channels + ch];
        acc[p00 + ch] += a * v;
        acc[p01 + ch] += b * v;
        acc[p10 + ch] += c * v;
        acc[p11 + ch] += d * v;
      }
    }
  }
  const out = new Float32Array(cot.length);
  for (let i = 0; i < acc.length; i++) out[i] = Math.fround(acc[i]);
  return out;
}

/**
 * Compose the local kernel at one pixel: sum_k beta_k * kernel_k.
 * Native casts both factors to float32 before mixing, mirrored here.
 */
function localKernel(
  beta: Float64Array, betaOffset: number, kernels: Float64Array,
  kernelCount: number, taps: number, out: Float64Array,
): void {
  out.fill(0);
  for (let k = 0; k < kernelCount; k++) {
    const w = Math.fround(beta[betaOffset + k]);
    if (w === 0) continue;
    const base = k * taps;
    for (let t = 0; t < taps; t++) {
      out[t] += w * Math.fround(kernels[base + t]);
    }
  }
}

/**
 * Spatially varying blur: per-pixel mix of basis-kernel convolutions,
 * replicate padding by s // 2 pixels (direct form of the native FFT
 * gather).
 */
export function svBlur(
  img: Float32Array, height: number, width: number, channels: number,
  beta: Float64Array, kernels: Float64Array,
  kernelCount: number, kernelSize: number,
): Float32Array {
  const r = (kernelSize - 1) / 2;
  const taps = kernelSize * kernelSize;
  const local = new Float64Array(taps);
  const out = new Float32Array(img.length);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const i = y * width + x;
      localKernel(beta, i * kernelCount, kernels, kernelCount, taps, local);
      for (let ch = 0; ch < channels; ch++) {
        let acc = 0;
        for (let ty = 0; ty < kernelSize; ty++) {
          let yy = y + r - ty;
          if (yy < 0) yy = 0; else if (yy > height - 1) yy = height - 1;
          const row = yy * width;
          for (let tx = 0; tx < kernelSize; tx++) {
            let xx = x + r - tx;
            if (xx < 0) xx = 0; else if (xx > width - 1) xx = width - 1;
            acc += local[ty * kernelSize + tx] * img[(row + xx) * channels + ch];
          }
        }
        out[i * channels + ch] = Math.fround(acc);
      }
    }
  }
  return out;
}

/** Exact transpose of {@link svBlur} at the same weights. */
export function svBlurAdjoint(
  cot: Float32Array, height: number, width: number, channels: number,
  beta: Float64Array, kernels: Float64Array,
  kernelCount: number, kernelSize: number,
): Float32Array {
  const r = (kernelSize - 1) / 2;
  const taps = kernelSize * kernelSize;
  const local = new Float64Array(taps);
  const acc = new Float64Array(cot.length);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const i = y * width + x;
      localKernel(beta, i * kernelCount, kernels, kernelCount, taps, local);
      for (let ty = 0; ty < kernelSize; ty++) {
        let yy = y + r - ty;
        if (yy < 0) yy = 0; else if (yy > height - 1) yy = height - 1;
        const row = yy * width;
        for (let tx = 0; tx < kernelSize; tx++) {
          let xx = x + r - tx;
          if (xx < 0) xx = 0; else if (xx > width - 1) xx = width - 1;
          const w = local[ty * kernelSize + tx];
          for (let ch = 0; ch < channels; ch++) {
            acc[(row + xx) * channels + ch] += w * cot[i * channels + ch];
          }
        }
      }
    }
  }
  const out = new Float32Array(cot.length);
  for (let i = 0; i < acc.length; i++) out[i] = Math.fround(acc[i]);
  return out;
}
