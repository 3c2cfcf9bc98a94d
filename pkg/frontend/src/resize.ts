/** Nearest-neighbor resize; good enough to feed fixed-input-size models. */

import { RasterImage } from './types.js';

export function resizeNearest(image: RasterImage, width: number, height: number): RasterImage {
  if (width === image.width && height === image.height) return image;
  const out = new Uint8Array(width * height * 3);
  for (let y = 0; y < height; y++) {
    const sy = Math.min(image.height - 1, Math.floor(((y + 0.5) * image.height) / height));
    for (let x = 0; x < width; x++) {
      const sx = Math.min(image.width - 1, Math.floor(((x + 0.5) * image.width) / width));
      const src = (sy * image.width + sx) * 3;
      const dst = (y * width + x) * 3;
      out[dst] = image.pixels[src];
      out[dst + 1] = image.pixels[src + 1];
      out[dst + 2] = image.pixels[src + 2];
    }
  }
  return { width, height, pixels: out };
}

export function parseResize(spec: string): { width: number; height: number } | null {
  if (spec === 'none') return null;
  const m = /^(\d+)x(\d+)$/.exec(spec);
  if (!m) throw new Error(`bad resize spec ${spec} (expected "none" or WxH)`);
  return { width: parseInt(m[1], 10), height: parseInt(m[2], 10) };
}
