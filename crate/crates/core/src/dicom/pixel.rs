use super::element::DataSet;
use super::tag::{tags, Tag};
use super::DicomError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelRepresentation {
    Unsigned,
    TwosComplement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Photometric {
    /// Minimum sample displays as white.
    Monochrome1,
    Monochrome2,
}

impl Photometric {
    pub fn as_str(self) -> &'static str {
        match self {
            Photometric::Monochrome1 => "MONOCHROME1",
            Photometric::Monochrome2 => "MONOCHROME2",
        }
    }
}

/// Everything needed to decode and present a native grayscale frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelDescriptor {
    pub rows: u32,
    pub cols: u32,
    pub bits_allocated: u16,
    pub bits_stored: u16,
    pub high_bit: u16,
    pub pixel_representation: PixelRepresentation,
    pub photometric: Photometric,
    pub samples_per_pixel: u16,
    pub rescale_slope: f64,
    pub rescale_intercept: f64,
    pub window_center: Option<f64>,
    pub window_width: Option<f64>,
}

impl PixelDescriptor {
    pub fn bytes_per_sample(&self) -> usize {
        self.bits_allocated as usize / 8
    }

    pub fn frame_len(&self) -> usize {
        self.rows as usize * self.cols as usize * self.bytes_per_sample()
    }
}

fn required_int(ds: &DataSet, tag: Tag) -> Result<i64, DicomError> {
    ds.get(tag)
        .and_then(|e| e.first_int())
        .ok_or(DicomError::MissingRequiredTag(tag))
}

fn optional_decimal(ds: &DataSet, tag: Tag) -> Option<f64> {
    ds.get(tag).and_then(|e| e.first_decimal())
}

pub fn read_pixel_descriptor(ds: &DataSet) -> Result<PixelDescriptor, DicomError> {
    let rows = required_int(ds, tags::ROWS)?;
    let cols = required_int(ds, tags::COLUMNS)?;
    let bits_allocated = required_int(ds, tags::BITS_ALLOCATED)?;
    let bits_stored = required_int(ds, tags::BITS_STORED)?;
    let representation = required_int(ds, tags::PIXEL_REPRESENTATION)?;
    let photometric =
        ds.get_str(tags::PHOTOMETRIC_INTERPRETATION)
            .ok_or(DicomError::MissingRequiredTag(
                tags::PHOTOMETRIC_INTERPRETATION,
            ))?;
    let samples = ds
        .get(tags::SAMPLES_PER_PIXEL)
        .and_then(|e| e.first_int())
        .unwrap_or(1);

    let unsupported = |msg: String| Err(DicomError::UnsupportedPixelFormat(msg));
    if samples != 1 {
        return unsupported(format!("samples per pixel {samples}"));
    }
    let photometric = match photometric.as_str() {
        "MONOCHROME1" => Photometric::Monochrome1,
        "MONOCHROME2" => Photometric::Monochrome2,
        other => return unsupported(format!("photometric interpretation {other:?}")),
    };
    if bits_allocated != 8 && bits_allocated != 16 {
        return unsupported(format!("bits allocated {bits_allocated}"));
    }
    if bits_stored < 1 || bits_stored > bits_allocated {
        return unsupported(format!("bits stored {bits_stored} of {bits_allocated}"));
    }
    if rows < 1 || cols < 1 {
        return unsupported(format!("image size {rows}x{cols}"));
    }
    let pixel_representation = match representation {
        0 => PixelRepresentation::Unsigned,
        1 => PixelRepresentation::TwosComplement,
        other => return unsupported(format!("pixel representation {other}")),
    };

    Ok(PixelDescriptor {
        rows: rows as u32,
        cols: cols as u32,
        bits_allocated: bits_allocated as u16,
        bits_stored: bits_stored as u16,
        high_bit: bits_stored as u16 - 1,
        pixel_representation,
        photometric,
        samples_per_pixel: 1,
        rescale_slope: optional_decimal(ds, tags::RESCALE_SLOPE).unwrap_or(1.0),
        rescale_intercept: optional_decimal(ds, tags::RESCALE_INTERCEPT).unwrap_or(0.0),
        window_center: optional_decimal(ds, tags::WINDOW_CENTER),
        window_width: optional_decimal(ds, tags::WINDOW_WIDTH),
    })
}

/// Stored pixel values, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i32>,
}

impl PixelMatrix {
    pub fn get(&self, row: usize, col: usize) -> i32 {
        self.data[row * self.cols + col]
    }
}

pub fn extract_pixel_data(ds: &DataSet, desc: &PixelDescriptor) -> Result<PixelMatrix, DicomError> {
    let element = ds
        .get(tags::PIXEL_DATA)
        .ok_or(DicomError::PixelDataMissing)?;
    let raw = &element.value;
    let expected = desc.frame_len();
    if raw.len() != expected && raw.len() != expected + 1 {
        return Err(DicomError::LengthMismatch {
            expected,
            actual: raw.len(),
        });
    }
    let bits = desc.bits_stored as u32;
    let mask: u32 = if bits >= 32 {
        u32::MAX
    } else {
        (1u32 << bits) - 1
    };
    let signed = desc.pixel_representation == PixelRepresentation::TwosComplement;
    let decode = |sample: u32| -> i32 {
        let v = sample & mask;
        if signed && v & (1 << (bits - 1)) != 0 {
            v as i32 - (1i32 << bits)
        } else {
            v as i32
        }
    };
    let data: Vec<i32> = match desc.bits_allocated {
        8 => raw[..expected].iter().map(|&b| decode(b as u32)).collect(),
        _ => raw[..expected]
            .chunks_exact(2)
            .map(|c| decode(u16::from_le_bytes([c[0], c[1]]) as u32))
            .collect(),
    };
    Ok(PixelMatrix {
        rows: desc.rows as usize,
        cols: desc.cols as usize,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dicom::element::{DataElement, TransferSyntax, Vr};
    use proptest::prelude::*;

    fn us(ds: &mut DataSet, tag: Tag, v: u16) {
        ds.insert(DataElement::new(tag, Vr::US, v.to_le_bytes().to_vec()));
    }

    fn dataset(
        rows: u16,
        cols: u16,
        bits: u16,
        stored: u16,
        signed: bool,
        pixels: Vec<u8>,
    ) -> DataSet {
        let mut ds = DataSet::new(TransferSyntax::ExplicitVrLittleEndian);
        us(&mut ds, tags::SAMPLES_PER_PIXEL, 1);
        ds.insert(DataElement::new(
            tags::PHOTOMETRIC_INTERPRETATION,
            Vr::CS,
            b"MONOCHROME2 ".to_vec(),
        ));
        us(&mut ds, tags::ROWS, rows);
        us(&mut ds, tags::COLUMNS, cols);
        us(&mut ds, tags::BITS_ALLOCATED, bits);
        us(&mut ds, tags::BITS_STORED, stored);
        us(&mut ds, tags::HIGH_BIT, stored - 1);
        us(&mut ds, tags::PIXEL_REPRESENTATION, signed as u16);
        ds.insert(DataElement::new(
            tags::PIXEL_DATA,
            if bits == 8 { Vr::OB } else { Vr::OW },
            pixels,
        ));
        ds
    }

    fn decode(ds: &DataSet) -> PixelMatrix {
        let desc = read_pixel_descriptor(ds).unwrap();
        extract_pixel_data(ds, &desc).unwrap()
    }

    #[test]
    fn missing_rows_names_the_tag() {
        let mut full = dataset(2, 2, 8, 8, false, vec![0, 1, 2, 3]);
        let mut ds = DataSet::new(TransferSyntax::ExplicitVrLittleEndian);
        for el in full.iter().filter(|e| e.tag != tags::ROWS) {
            ds.insert(el.clone());
        }
        match read_pixel_descriptor(&ds) {
            Err(DicomError::MissingRequiredTag(t)) => assert_eq!(t, Tag::new(0x0028, 0x0010)),
            other => panic!("unexpected {other:?}"),
        }
        // Rescale defaults apply when the tags are absent.
        let desc = read_pixel_descriptor(&full).unwrap();
        assert_eq!((desc.rescale_slope, desc.rescale_intercept), (1.0, 0.0));
        assert_eq!(desc.window_center, None);
        full.insert(DataElement::new(
            tags::WINDOW_CENTER,
            Vr::DS,
            b"40\\400".to_vec(),
        ));
        assert_eq!(
            read_pixel_descriptor(&full).unwrap().window_center,
            Some(40.0)
        );
    }

    #[test]
    fn unsupported_formats() {
        let mut ds = dataset(2, 2, 8, 8, false, vec![0; 4]);
        us(&mut ds, tags::SAMPLES_PER_PIXEL, 3);
        assert!(matches!(
            read_pixel_descriptor(&ds),
            Err(DicomError::UnsupportedPixelFormat(_))
        ));

        let mut ds = dataset(2, 2, 8, 8, false, vec![0; 4]);
        ds.insert(DataElement::new(
            tags::PHOTOMETRIC_INTERPRETATION,
            Vr::CS,
            b"RGB ".to_vec(),
        ));
        assert!(matches!(
            read_pixel_descriptor(&ds),
            Err(DicomError::UnsupportedPixelFormat(_))
        ));

        let ds = dataset(2, 2, 32, 32, false, vec![0; 16]);
        assert!(matches!(
            read_pixel_descriptor(&ds),
            Err(DicomError::UnsupportedPixelFormat(_))
        ));
    }

    #[test]
    fn eight_bit_row_major() {
        let m = decode(&dataset(2, 2, 8, 8, false, vec![0, 1, 2, 3]));
        assert_eq!(m.data, vec![0, 1, 2, 3]);
        assert_eq!(m.get(1, 0), 2);
    }

    #[test]
    fn sixteen_bit_little_endian_pairs() {
        let bytes = vec![0x00, 0x01, 0x00, 0x02, 0x00, 0x04, 0x00, 0x08];
        let m = decode(&dataset(2, 2, 16, 16, false, bytes));
        assert_eq!(m.data, vec![256, 512, 1024, 2048]);
    }

    #[test]
    fn bits_beyond_stored_are_masked() {
        // 0xF0FF keeps its low 12 bits (0x0FF); 0xFFFF becomes 0x0FFF.
        let bytes = vec![0xFF, 0xF0, 0xFF, 0xFF, 0x00, 0xF8, 0x34, 0x12];
        let m = decode(&dataset(2, 2, 16, 12, false, bytes));
        assert_eq!(m.data, vec![0x00FF, 4095, 0x0800, 0x0234]);
    }

    #[test]
    fn signed_samples_are_sign_extended() {
        // 12-bit two's complement: 0x0800 is -2048, 0x0FFF is -1.
        let bytes = vec![0x00, 0x08, 0xFF, 0x0F, 0xFF, 0x07, 0x01, 0x00];
        let m = decode(&dataset(2, 2, 16, 12, true, bytes));
        assert_eq!(m.data, vec![-2048, -1, 2047, 1]);
        let m = decode(&dataset(1, 2, 8, 8, true, vec![0x80, 0x7F]));
        assert_eq!(m.data, vec![-128, 127]);
    }

    #[test]
    fn pad_byte_tolerated_but_other_lengths_rejected() {
        let ok = dataset(1, 3, 8, 8, false, vec![1, 2, 3, 0]);
        assert_eq!(decode(&ok).data, vec![1, 2, 3]);
        let bad = dataset(2, 2, 16, 16, false, vec![0; 6]);
        let desc = read_pixel_descriptor(&bad).unwrap();
        assert!(matches!(
            extract_pixel_data(&bad, &desc),
            Err(DicomError::LengthMismatch {
                expected: 8,
                actual: 6
            })
        ));
        let mut none = dataset(1, 1, 8, 8, false, vec![0, 0]);
        let desc = read_pixel_descriptor(&none).unwrap();
        none = {
            let mut ds = DataSet::new(none.transfer_syntax);
            for el in none.iter().filter(|e| e.tag != tags::PIXEL_DATA) {
                ds.insert(el.clone());
            }
            ds
        };
        assert!(matches!(
            extract_pixel_data(&none, &desc),
            Err(DicomError::PixelDataMissing)
        ));
    }

    proptest! {
        #[test]
        fn unsigned_unmasked_reserialization_is_identity(
            rows in 1u16..6, cols in 1u16..6, wide in any::<bool>(), seed in any::<u64>()
        ) {
            let bits = if wide { 16 } else { 8 };
            let n = rows as usize * cols as usize * (bits as usize / 8);
            let mut state = seed;
            let mut bytes: Vec<u8> = (0..n).map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 56) as u8
            }).collect();
            let original = bytes.clone();
            if bytes.len() % 2 == 1 {
                bytes.push(0);
            }
            let m = decode(&dataset(rows, cols, bits, bits, false, bytes));
            let reserialized: Vec<u8> = if bits == 8 {
                m.data.iter().map(|&v| v as u8).collect()
            } else {
                m.data.iter().flat_map(|&v| (v as u16).to_le_bytes()).collect()
            };
            prop_assert_eq!(reserialized, original);
        }
    }
}
