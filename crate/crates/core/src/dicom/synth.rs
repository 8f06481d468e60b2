//! Minimal explicit VR little endian writer for generated test images.
//! It only emits the handful of attributes a single grayscale frame needs.

use super::element::TransferSyntax;

pub struct SyntheticImage<'a> {
    pub sop_instance_uid: &'a str,
    pub rows: u16,
    pub cols: u16,
    pub photometric: &'a str,
    /// 16-bit unsigned samples, row-major, all bits stored.
    pub pixels: &'a [u16],
    pub window: Option<(f64, f64)>,
}

const SECONDARY_CAPTURE: &str = "1.2.840.10008.5.1.4.1.1.7";

fn padded(text: &str, pad: u8) -> Vec<u8> {
    let mut v = text.as_bytes().to_vec();
    if v.len() % 2 == 1 {
        v.push(pad);
    }
    v
}

fn put(out: &mut Vec<u8>, group: u16, element: u16, vr: &[u8; 2], value: &[u8]) {
    out.extend_from_slice(&group.to_le_bytes());
    out.extend_from_slice(&element.to_le_bytes());
    out.extend_from_slice(vr);
    if matches!(vr, b"OB" | b"OW" | b"SQ" | b"UN") {
        out.extend_from_slice(&[0, 0]);
        out.extend_from_slice(&(value.len() as u32).to_le_bytes());
    } else {
        out.extend_from_slice(&(value.len() as u16).to_le_bytes());
    }
    out.extend_from_slice(value);
}

/// Encodes a single-frame 16-bit monochrome file.
pub fn encode_synthetic(img: &SyntheticImage<'_>) -> Vec<u8> {
    assert_eq!(img.pixels.len(), img.rows as usize * img.cols as usize);
    let uid = padded(img.sop_instance_uid, 0);
    let mut meta = Vec::new();
    put(&mut meta, 0x0002, 0x0001, b"OB", &[0, 1]);
    put(
        &mut meta,
        0x0002,
        0x0002,
        b"UI",
        &padded(SECONDARY_CAPTURE, 0),
    );
    put(&mut meta, 0x0002, 0x0003, b"UI", &uid);
    put(
        &mut meta,
        0x0002,
        0x0010,
        b"UI",
        &padded(TransferSyntax::EXPLICIT_UID, 0),
    );

    let mut out = vec![0u8; 128];
    out.extend_from_slice(b"DICM");
    put(
        &mut out,
        0x0002,
        0x0000,
        b"UL",
        &(meta.len() as u32).to_le_bytes(),
    );
    out.extend_from_slice(&meta);

    put(
        &mut out,
        0x0008,
        0x0016,
        b"UI",
        &padded(SECONDARY_CAPTURE, 0),
    );
    put(&mut out, 0x0008, 0x0018, b"UI", &uid);
    put(&mut out, 0x0008, 0x0060, b"CS", b"DX");
    put(&mut out, 0x0028, 0x0002, b"US", &1u16.to_le_bytes());
    put(
        &mut out,
        0x0028,
        0x0004,
        b"CS",
        &padded(img.photometric, b' '),
    );
    put(&mut out, 0x0028, 0x0010, b"US", &img.rows.to_le_bytes());
    put(&mut out, 0x0028, 0x0011, b"US", &img.cols.to_le_bytes());
    put(&mut out, 0x0028, 0x0100, b"US", &16u16.to_le_bytes());
    put(&mut out, 0x0028, 0x0101, b"US", &16u16.to_le_bytes());
    put(&mut out, 0x0028, 0x0102, b"US", &15u16.to_le_bytes());
    put(&mut out, 0x0028, 0x0103, b"US", &0u16.to_le_bytes());
    if let Some((center, width)) = img.window {
        put(
            &mut out,
            0x0028,
            0x1050,
            b"DS",
            &padded(&center.to_string(), b' '),
        );
        put(
            &mut out,
            0x0028,
            0x1051,
            b"DS",
            &padded(&width.to_string(), b' '),
        );
    }
    let pixel_bytes: Vec<u8> = img.pixels.iter().flat_map(|p| p.to_le_bytes()).collect();
    put(&mut out, 0x7FE0, 0x0010, b"OW", &pixel_bytes);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dicom::{extract_pixel_data, parse_file, read_pixel_descriptor, tags};

    #[test]
    fn encoded_file_parses_back() {
        let pixels = [0u16, 100, 200, 65535, 7, 9];
        let bytes = encode_synthetic(&SyntheticImage {
            sop_instance_uid: "1.2.3",
            rows: 2,
            cols: 3,
            photometric: "MONOCHROME1",
            pixels: &pixels,
            window: Some((100.0, 200.0)),
        });
        let file = parse_file(&bytes).unwrap();
        assert_eq!(
            file.dataset.get_str(tags::SOP_INSTANCE_UID).unwrap(),
            "1.2.3"
        );
        let desc = read_pixel_descriptor(&file.dataset).unwrap();
        assert_eq!(desc.window_center, Some(100.0));
        let m = extract_pixel_data(&file.dataset, &desc).unwrap();
        assert_eq!(m.data, pixels.iter().map(|&p| p as i32).collect::<Vec<_>>());
    }
}
