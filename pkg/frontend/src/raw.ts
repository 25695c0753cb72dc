/**
 * The simulator's raw float image container: `TRAW`, a version word,
 * the raster shape, then little-endian float32 planes.  PNG outputs are
 * quantized; this format is what every bit-exactness check runs on.
 */

import { FormatError } from "./kv.js";

const MAGIC = 0x57415254; // "TRAW" little-endian
const VERSION = 1;
const HEADER_BYTES = 20;

export interface RawImage {
  readonly height: number;
  readonly width: number;
  /** 1 for grayscale, 3 for RGB. */
  readonly channels: number;
  /** Row-major, channel-interleaved, length height*width*channels. */
  readonly data: Float32Array;
}

export function readRaw(bytes: Uint8Array): RawImage {
  if (bytes.byteLength < HEADER_BYTES) {
    throw new FormatError("raw image: truncated header");
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  if (view.getUint32(0, true) !== MAGIC) {
    throw new FormatError("raw image: bad magic");
  }
  const version = view.getUint32(4, true);
  if (version !== VERSION) {
    throw new FormatError(`raw image: unsupported version ${version}`);
  }
  const height = view.getUint32(8, true);
  const width = view.getUint32(12, true);
  const channels = view.getUint32(16, true);
  const count = height * width * channels;
  if (bytes.byteLength < HEADER_BYTES + 4 * count) {
    throw new FormatError("raw image: truncated payload");
  }
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    data[i] = view.getFloat32(HEADER_BYTES + 4 * i, true);
  }
  return { height, width, channels, data };
}

export function writeRaw(img: RawImage): Uint8Array {
  const count = img.height * img.width * img.channels;
  if (img.data.length !== count) {
    throw new RangeError(
      `raw image: data length ${img.data.length} does not match ` +
      `${img.height}x${img.width}x${img.channels}`);
  }
  const bytes = new Uint8Array(HEADER_BYTES + 4 * count);
  const view = new DataView(bytes.buffer);
  view.setUint32(0, MAGIC, true);
  view.setUint32(4, VERSION, true);
  view.setUint32(8, img.height, true);
  view.setUint32(12, img.width, true);
  view.setUint32(16, img.channels, true);
  for (let i = 0; i < count; i++) {
    view.setFloat32(HEADER_BYTES + 4 * i, img.data[i], true);
  }
  return bytes;
}
