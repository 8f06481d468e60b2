use std::io::Write;

use flate2::write::ZlibEncoder;
use flate2::Compression;

use super::ImageTensor;

const SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0D, 0x0A, 0x1A, 0x0A];

fn chunk(out: &mut Vec<u8>, kind: &[u8; 4], data: &[u8]) {
    out.extend_from_slice(&(data.len() as u32).to_be_bytes());
    let mut crc = crc32fast::Hasher::new();
    crc.update(kind);
    crc.update(data);
    out.extend_from_slice(kind);
    out.extend_from_slice(data);
    out.extend_from_slice(&crc.finalize().to_be_bytes());
}

/// Encodes an 8-bit grayscale PNG with samples `round(v * 255)`.
pub fn export_png(img: &ImageTensor) -> Vec<u8> {
    let (h, w) = (img.height(), img.width());
    let mut ihdr = Vec::with_capacity(13);
    ihdr.extend_from_slice(&(w as u32).to_be_bytes());
    ihdr.extend_from_slice(&(h as u32).to_be_bytes());
    // bit depth 8, color type 0 (grayscale), deflate, adaptive filter, no interlace
    ihdr.extend_from_slice(&[8, 0, 0, 0, 0]);

    let mut scanlines = Vec::with_capacity(h * (w + 1));
    for row in img.values().chunks(w) {
        scanlines.push(0); // filter type None
        scanlines.extend(row.iter().map(|&v| (v * 255.0).round() as u8));
    }
    let mut z = ZlibEncoder::new(Vec::new(), Compression::default());
    z.write_all(&scanlines).expect("in-memory write");
    let idat = z.finish().expect("in-memory write");

    let mut out = Vec::with_capacity(idat.len() + 64);
    out.extend_from_slice(&SIGNATURE);
    chunk(&mut out, b"IHDR", &ihdr);
    chunk(&mut out, b"IDAT", &idat);
    chunk(&mut out, b"IEND", &[]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_with_signature_and_ends_with_iend() {
        let bytes = export_png(&ImageTensor::filled(1, 1, 1.0));
        assert_eq!(
            &bytes[..8],
            &[0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A]
        );
        assert_eq!(&bytes[12..16], b"IHDR");
        assert_eq!(&bytes[bytes.len() - 8..bytes.len() - 4], b"IEND");
        // IEND has a fixed CRC.
        assert_eq!(&bytes[bytes.len() - 4..], &[0xAE, 0x42, 0x60, 0x82]);
    }
}
