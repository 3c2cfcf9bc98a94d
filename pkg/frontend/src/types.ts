/** Shared types for the detector bridge. */

export interface RasterImage {
  width: number;
  height: number;
  /** Row-major RGB samples, 3 bytes per pixel. */
  pixels: Uint8Array;
}

export interface Detection {
  /** [xMin, yMin, xMax, yMax] in pixel edge coordinates of the image the model saw. */
  bbox: [number, number, number, number];
  score: number;
  label: string;
}

export interface DetectionModel {
  name: string;
  detect(image: RasterImage): Detection[];
}

/** Adapter modules loaded via `module:<path>` must export this factory. */
export type ModelFactory = (
  params: Record<string, string>,
) => DetectionModel | Promise<DetectionModel>;

export interface BridgeConfig {
  /** Model identifier, e.g. "builtin:threshold?tolerance=40" or "module:./adapter.js". */
  model: string;
  /** Detections below this score are dropped before writing. */
  scoreFloor: number;
  inputDir: string;
  outputPath: string;
  /** "none", or "WxH": stretch to WxH for the model, de-scale boxes back. */
  resize: string;
}

/** One line of the schema_version 1 detection stream. */
export interface WireLine {
  schema_version: 1;
  image: { id: string; width: number; height: number };
  detections: { bbox: [number, number, number, number]; score: number; label: string }[];
}
