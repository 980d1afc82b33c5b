import { describe, expect, it } from 'vitest';
import { decodePgm } from '../src/pgm';

function pgm(header: string, payload: number[]): Uint8Array {
  const head = new TextEncoder().encode(header);
  return new Uint8Array([...head, ...payload]);
}

describe('decodePgm', () => {
  it('decodes an 8-bit image', () => {
    const img = decodePgm(pgm('P5\n2 2\n255\n', [0, 255, 128, 64]));
    expect(img.width).toBe(2);
    expect(img.height).toBe(2);
    expect(Array.from(img.pixels)).toEqual([0, 255, 128, 64]);
  });

  it('decodes 16-bit big-endian samples', () => {
    const img = decodePgm(pgm('P5\n2 1\n65535\n', [0x01, 0xf4, 0xff, 0xff]));
    expect(Array.from(img.pixels)).toEqual([500, 65535]);
  });

  it('skips header comments', () => {
    const img = decodePgm(pgm('P5 # hi\n# another\n1 1\n255\n', [9]));
    expect(img.pixels[0]).toBe(9);
  });

  it('rejects other magics', () => {
    expect(() => decodePgm(pgm('P6\n1 1\n255\n', [1, 2, 3]))).toThrow(/P5/);
  });

  it('rejects truncated payloads', () => {
    expect(() => decodePgm(pgm('P5\n4 4\n255\n', [1, 2]))).toThrow(/truncated/);
  });
});
