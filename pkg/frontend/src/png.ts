/**
 * Minimal PNG encoder: 8-bit RGBA, no interlacing, filter 0 on every
 * row, one IDAT chunk compressed with zlib at a fixed level. With the
 * compression level pinned, identical pixels give identical bytes, so
 * rendered figures can be compared and cached by hash.
 */

import { deflateSync } from "node:zlib";

import { Raster } from "./raster.js";

const SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

const CRC_TABLE = new Uint32Array(256);
for (let n = 0; n < 256; n++) {
  let c = n;
  for (let k = 0; k < 8; k++) {
    c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
  }
  CRC_TABLE[n] = c >>> 0;
}

export function crc32(buf: Buffer): number {
  let c = 0xffffffff;
  for (let i = 0; i < buf.length; i++) {
    c = CRC_TABLE[(c ^ buf[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Buffer): Buffer {
  const head = Buffer.alloc(8);
  head.writeUInt32BE(data.length, 0);
  head.write(type, 4, "ascii");
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(Buffer.concat([head.subarray(4), data])), 0);
  return Buffer.concat([head, data, crc]);
}

/** Raw scanline stream: filter byte 0 followed by the row's RGBA bytes. */
export function scanlines(raster: Raster): Buffer {
  const rowBytes = raster.width * 4;
  const out = Buffer.alloc(raster.height * (rowBytes + 1));
  for (let y = 0; y < raster.height; y++) {
    const offset = y * (rowBytes + 1);
    out[offset] = 0;
    out.set(raster.data.subarray(y * rowBytes, (y + 1) * rowBytes), offset + 1);
  }
  return out;
}

export function encodePng(raster: Raster): Buffer {
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(raster.width, 0);
  ihdr.writeUInt32BE(raster.height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 6; // color type RGBA
  ihdr[10] = 0; // compression
  ihdr[11] = 0; // filter method
  ihdr[12] = 0; // no interlace
  const idat = deflateSync(scanlines(raster), { level: 9 });
  return Buffer.concat([
    SIGNATURE,
    chunk("IHDR", ihdr),
    chunk("IDAT", idat),
    chunk("IEND", Buffer.alloc(0)),
  ]);
}
