/**
 * Detector bridge: run a model over an image directory and write the
 * schema_version 1 detection stream, one JSON line per image.
 *
 * The bridge owns image loading, optional resizing with box
 * de-scaling, label collapsing to "object", and the score floor.
 * It never merges or pads boxes: post-processing lives downstream so
 * experiments toggle it in a single place.
 */

import { readFileSync, readdirSync, writeFileSync } from 'node:fs';
import { basename, extname, join } from 'node:path';
import { readPpm } from './ppm.js';
import { parseResize, resizeNearest } from './resize.js';
import { BridgeConfig, DetectionModel, WireLine } from './types.js';

export interface BridgeSummary {
  images: number;
  written: number;
  skipped: string[];
}

const round3 = (v: number) => Math.round(v * 1000) / 1000;

export function detectionsToLine(
  imageId: string,
  width: number,
  height: number,
  detections: { bbox: [number, number, number, number]; score: number }[],
  scaleX: number,
  scaleY: number,
  scoreFloor: number,
): WireLine {
  const out: WireLine = {
    schema_version: 1,
    image: { id: imageId, width, height },
    detections: [],
  };
  for (const det of detections) {
    if (det.score < scoreFloor) continue;
    const [x0, y0, x1, y1] = det.bbox;
    // de-scale to original pixels, clamp to the image
    const bbox: [number, number, number, number] = [
      Math.min(Math.max(x0 * scaleX, 0), width),
      Math.min(Math.max(y0 * scaleY, 0), height),
      Math.min(Math.max(x1 * scaleX, 0), width),
      Math.min(Math.max(y1 * scaleY, 0), height),
    ];
    if (bbox[0] >= bbox[2] || bbox[1] >= bbox[3]) continue; // degenerate after clamping
    out.detections.push({
      bbox: bbox.map(round3) as [number, number, number, number],
      score: Math.min(Math.max(det.score, 0), 1),
      label: 'object',
    });
  }
  return out;
}

export function listImages(dir: string): string[] {
  return readdirSync(dir)
    .filter((name) => extname(name).toLowerCase() === '.ppm')
    .sort();
}

export async function exportDetections(
  cfg: BridgeConfig,
  model: DetectionModel,
): Promise<BridgeSummary> {
  const resize = parseResize(cfg.resize);
  const names = listImages(cfg.inputDir);
  const lines: string[] = [];
  const summary: BridgeSummary = { images: names.length, written: 0, skipped: [] };

  for (const name of names) {
    const imageId = basename(name, extname(name));
    let line: WireLine;
    try {
      const image = readPpm(readFileSync(join(cfg.inputDir, name)));
      const input = resize ? resizeNearest(image, resize.width, resize.height) : image;
      const detections = model.detect(input);
      line = detectionsToLine(
        imageId,
        image.width,
        image.height,
        detections,
        image.width / input.width,
        image.height / input.height,
        cfg.scoreFloor,
      );
    } catch (err) {
      console.error(`warning: skipping ${name}: ${(err as Error).message}`);
      summary.skipped.push(name);
      continue;
    }
    lines.push(JSON.stringify(line));
    summary.written += 1;
  }

  writeFileSync(cfg.outputPath, lines.map((l) => l + '\n').join(''));
  return summary;
}
