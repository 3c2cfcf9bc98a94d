/** Minimal PPM (P3/P6, maxval 255) decoder and P6 encoder. */

import { RasterImage } from './types.js';

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d || byte === 0x0c;
}

export function readPpm(data: Buffer): RasterImage {
  let pos = 0;

  function nextToken(): string {
    while (pos < data.length) {
      if (data[pos] === 0x23) {
        // comment runs to end of line
        while (pos < data.length && data[pos] !== 0x0a) pos++;
      } else if (isSpace(data[pos])) {
        pos++;
      } else {
        break;
      }
    }
    const start = pos;
    while (pos < data.length && !isSpace(data[pos]) && data[pos] !== 0x23) pos++;
    if (start === pos) throw new Error('truncated PPM header');
    return data.subarray(start, pos).toString('ascii');
  }

  const magic = nextToken();
  if (magic !== 'P3' && magic !== 'P6') throw new Error(`not a PPM image (magic ${magic})`);
  const width = parseInt(nextToken(), 10);
  const height = parseInt(nextToken(), 10);
  const maxval = parseInt(nextToken(), 10);
  if (!(width >= 1) || !(height >= 1)) throw new Error(`bad PPM dimensions ${width}x${height}`);
  if (maxval !== 255) throw new Error(`unsupported PPM maxval ${maxval} (only 255)`);

  const n = width * height * 3;
  let pixels: Uint8Array;
  if (magic === 'P6') {
    pos += 1; // single whitespace byte after maxval
    if (data.length - pos < n) {
      throw new Error(`truncated PPM payload: expected ${n} bytes, got ${data.length - pos}`);
    }
    pixels = new Uint8Array(data.subarray(pos, pos + n));
  } else {
    const values = data
      .subarray(pos)
      .toString('ascii')
      .split(/\s+/)
      .filter((t) => t.length > 0);
    if (values.length < n) {
      throw new Error(`truncated PPM payload: expected ${n} samples, got ${values.length}`);
    }
    pixels = new Uint8Array(n);
    for (let i = 0; i < n; i++) {
      const v = parseInt(values[i], 10);
      if (!(v >= 0 && v <= 255)) throw new Error(`P3 sample outside 0..255: ${values[i]}`);
      pixels[i] = v;
    }
  }
  return { width, height, pixels };
}

export function writePpm(image: RasterImage): Buffer {
  const header = Buffer.from(`P6\n${image.width} ${image.height}\n255\n`, 'ascii');
  return Buffer.concat([header, Buffer.from(image.pixels)]);
}
