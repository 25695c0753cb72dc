/**
 * Parser for the simulator's `key = value` text files (protocol files,
 * sidecars, CLI stdout).  Lines are independent; `#` starts a comment.
 */

export class FormatError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "FormatError";
  }
}

/** Parse `key = value` lines into a map; duplicate keys are an error. */
export function parseKeyValue(text: string): Map<string, string> {
  const out = new Map<string, string>();
  const lines = text.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === "" || line.startsWith("#")) continue;
    const eq = line.indexOf("=");
    if (eq < 0) {
      throw new FormatError(`line ${i + 1}: expected 'key = value'`);
    }
    const key = line.slice(0, eq).trim();
    const value = line.slice(eq + 1).trim();
    if (key === "") {
      throw new FormatError(`line ${i + 1}: empty key`);
    }
    if (out.has(key)) {
      throw new FormatError(`line ${i + 1}: duplicate key '${key}'`);
    }
    out.set(key, value);
  }
  return out;
}

export function requireString(kv: Map<string, string>, key: string): string {
  const v = kv.get(key);
  if (v === undefined) {
    throw new FormatError(`missing key '${key}'`);
  }
  return v;
}

export function requireNumber(kv: Map<string, string>, key: string): number {
  const v = Number(requireString(kv, key));
  if (!Number.isFinite(v)) {
    throw new FormatError(`key '${key}' is not a finite number`);
  }
  return v;
}

/** The imaging-protocol fields embedded in protocol files and sidecars. */
export interface Protocol {
  readonly distance_m: number;
  readonly focal_length_m: number;
  readonly f_number: number;
  readonly scene_width_m: number;
  readonly cn2: number;
  readonly wavelength_m: number;
  readonly image_width_px: number;
  readonly image_height_px: number;
  readonly noise_sigma: number;
}

const PROTOCOL_DEFAULTS = {
  wavelength_m: 525e-9,
  image_width_px: 256,
  image_height_px: 256,
  noise_sigma: 0.0,
};

/**
 * Extract a protocol from parsed key-value text.  Works on both plain
 * protocol files and sidecars (which carry extra keys of their own).
 */
export function protocolFromKv(kv: Map<string, string>): Protocol {
  const p = {
    distance_m: requireNumber(kv, "distance_m"),
    focal_length_m: requireNumber(kv, "focal_length_m"),
    f_number: requireNumber(kv, "f_number"),
    scene_width_m: requireNumber(kv, "scene_width_m"),
    cn2: requireNumber(kv, "cn2"),
    wavelength_m: PROTOCOL_DEFAULTS.wavelength_m,
    image_width_px: PROTOCOL_DEFAULTS.image_width_px,
    image_height_px: PROTOCOL_DEFAULTS.image_height_px,
    noise_sigma: PROTOCOL_DEFAULTS.noise_sigma,
  };
  if (kv.has("wavelength_m")) p.wavelength_m = requireNumber(kv, "wavelength_m");
  if (kv.has("image_width_px")) p.image_width_px = requireNumber(kv, "image_width_px");
  if (kv.has("image_height_px")) p.image_height_px = requireNumber(kv, "image_height_px");
  if (kv.has("noise_sigma")) p.noise_sigma = requireNumber(kv, "noise_sigma");
  return Object.freeze(p);
}

/** Serialize a protocol back to the text format the CLI accepts. */
export function protocolToText(p: Protocol): string {
  const lines = [
    `distance_m = ${p.distance_m}`,
    `focal_length_m = ${p.focal_length_m}`,
    `f_number = ${p.f_number}`,
    `scene_width_m = ${p.scene_width_m}`,
    `cn2 = ${p.cn2}`,
    `wavelength_m = ${p.wavelength_m}`,
    `image_width_px = ${p.image_width_px}`,
    `image_height_px = ${p.image_height_px}`,
    `noise_sigma = ${p.noise_sigma}`,
  ];
  return lines.join("\n") + "\n";
}
