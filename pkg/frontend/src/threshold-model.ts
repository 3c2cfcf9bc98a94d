/**
 * Built-in reference model: color-distance threshold plus connected
 * components. Deterministic and dependency-free, so the bridge works
 * end to end without downloading weights. Emits raw per-component
 * boxes; merging and slack stay downstream.
 */

import { Detection, DetectionModel, RasterImage } from './types.js';

export interface ThresholdParams {
  tolerance: number;
  minArea: number;
  border: number;
}

const DEFAULTS: ThresholdParams = { tolerance: 40, minArea: 64, border: 8 };

function borderMedianColor(image: RasterImage, border: number): [number, number, number] {
  const { width, height, pixels } = image;
  const samples: number[][] = [[], [], []];
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const inBand = x < border || y < border || x >= width - border || y >= height - border;
      if (!inBand) continue;
      const p = (y * width + x) * 3;
      samples[0].push(pixels[p]);
      samples[1].push(pixels[p + 1]);
      samples[2].push(pixels[p + 2]);
    }
  }
  const median = (values: number[]) => {
    values.sort((a, b) => a - b);
    const mid = Math.floor(values.length / 2);
    return values.length % 2 ? values[mid] : Math.round((values[mid - 1] + values[mid]) / 2);
  };
  return [median(samples[0]), median(samples[1]), median(samples[2])];
}

export function createThresholdModel(params: Record<string, string>): DetectionModel {
  const cfg: ThresholdParams = {
    tolerance: params.tolerance !== undefined ? Number(params.tolerance) : DEFAULTS.tolerance,
    minArea: params.minArea !== undefined ? Number(params.minArea) : DEFAULTS.minArea,
    border: params.border !== undefined ? Number(params.border) : DEFAULTS.border,
  };
  if (!(cfg.tolerance >= 0) || !(cfg.minArea >= 1) || !(cfg.border >= 1)) {
    throw new Error(`bad threshold model params: ${JSON.stringify(cfg)}`);
  }

  return {
    name: 'threshold',
    detect(image: RasterImage): Detection[] {
      const { width, height, pixels } = image;
      const border = Math.min(cfg.border, Math.floor(Math.min(width, height) / 4) || 1);
      const ref = borderMedianColor(image, border);
      const tolSq = cfg.tolerance * cfg.tolerance;

      const fg = new Uint8Array(width * height);
      for (let i = 0; i < width * height; i++) {
        const dr = pixels[i * 3] - ref[0];
        const dg = pixels[i * 3 + 1] - ref[1];
        const db = pixels[i * 3 + 2] - ref[2];
        if (dr * dr + dg * dg + db * db > tolSq) fg[i] = 1;
      }

      // 8-connected flood fill with an explicit stack
      const labels = new Int32Array(width * height);
      const detections: Detection[] = [];
      let nextLabel = 0;
      const stack: number[] = [];
      for (let start = 0; start < width * height; start++) {
        if (!fg[start] || labels[start]) continue;
        nextLabel++;
        labels[start] = nextLabel;
        stack.push(start);
        let minX = width;
        let minY = height;
        let maxX = -1;
        let maxY = -1;
        let area = 0;
        while (stack.length) {
          const idx = stack.pop()!;
          const x = idx % width;
          const y = (idx - x) / width;
          area++;
          if (x < minX) minX = x;
          if (x > maxX) maxX = x;
          if (y < minY) minY = y;
          if (y > maxY) maxY = y;
          for (let dy = -1; dy <= 1; dy++) {
            for (let dx = -1; dx <= 1; dx++) {
              if (!dx && !dy) continue;
              const nx = x + dx;
              const ny = y + dy;
              if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
              const nIdx = ny * width + nx;
              if (fg[nIdx] && !labels[nIdx]) {
                labels[nIdx] = nextLabel;
                stack.push(nIdx);
              }
            }
          }
        }
        if (area < cfg.minArea) continue;
        const boxArea = (maxX + 1 - minX) * (maxY + 1 - minY);
        detections.push({
          bbox: [minX, minY, maxX + 1, maxY + 1],
          score: area / boxArea,
          label: `component_${nextLabel}`,
        });
      }
      detections.sort((a, b) => b.score - a.score || a.bbox[0] - b.bbox[0] || a.bbox[1] - b.bbox[1]);
      return detections;
    },
  };
}
