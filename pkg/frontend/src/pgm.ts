export interface GrayImage {
  width: number;
  height: number;
  maxval: number;
  /** row-major samples, length width*height */
  pixels: Float64Array;
}

/** Decode a binary PGM (P5); 16-bit samples are big-endian per the spec. */
export function decodePgm(data: Uint8Array): GrayImage {
  if (data[0] !== 0x50 || data[1] !== 0x35) {
    throw new Error('not a P5 PGM');
  }
  let pos = 2;
  const tokens: number[] = [];
  while (tokens.length < 3) {
    while (pos < data.length && isSpace(data[pos])) pos++;
    if (data[pos] === 0x23) {
      // '#' comment to end of line
      while (pos < data.length && data[pos] !== 0x0a) pos++;
      continue;
    }
    let tok = '';
    while (pos < data.length && !isSpace(data[pos])) {
      tok += String.fromCharCode(data[pos]);
      pos++;
    }
    if (!tok) throw new Error('truncated PGM header');
    tokens.push(parseInt(tok, 10));
  }
  pos++; // single whitespace after maxval
  const [width, height, maxval] = tokens;
  const n = width * height;
  const pixels = new Float64Array(n);
  if (maxval > 255) {
    if (data.length < pos + 2 * n) throw new Error('truncated PGM payload');
    for (let i = 0; i < n; i++) {
      pixels[i] = (data[pos + 2 * i] << 8) | data[pos + 2 * i + 1];
    }
  } else {
    if (data.length < pos + n) throw new Error('truncated PGM payload');
    for (let i = 0; i < n; i++) pixels[i] = data[pos + i];
  }
  return { width, height, maxval, pixels };
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}
