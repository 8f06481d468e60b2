use std::fmt::Write as _;

use super::element::{DataElement, Length, Vr};
use super::parse::DicomFile;

fn render_value(el: &DataElement) -> String {
    let raw = &el.value;
    match el.vr {
        Vr::SQ => "<sequence>".to_string(),
        vr if vr.is_string() => {
            let mut out = String::new();
            for &b in super::element::trim_padding(raw) {
                if (0x20..=0x7E).contains(&b) {
                    out.push(b as char);
                } else {
                    let _ = write!(out, "\\x{b:02x}");
                }
            }
            out
        }
        Vr::US | Vr::SS | Vr::UL | Vr::SL => el
            .ints()
            .unwrap_or_default()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("\\"),
        _ => {
            let mut out: String = raw.iter().take(16).map(|b| format!("{b:02x}")).collect();
            if raw.len() > 16 {
                out.push_str("...");
            }
            out
        }
    }
}

/// One `GGGG,EEEE VR length value` line for an element.
pub fn dump_element(el: &DataElement) -> String {
    let length = match el.length {
        Length::Defined(n) => n.to_string(),
        Length::Undefined => "undefined".to_string(),
    };
    let value = render_value(el);
    let mut line = format!(
        "{:04X},{:04X} {} {}",
        el.tag.group, el.tag.element, el.vr, length
    );
    if !value.is_empty() {
        line.push(' ');
        line.push_str(&value);
    }
    line
}

/// Meta group followed by the main data set, one line per element.
pub fn dump(file: &DicomFile) -> String {
    let mut out = String::new();
    for el in file.file_meta.iter().chain(file.dataset.iter()) {
        out.push_str(&dump_element(el));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dicom::tag::Tag;

    #[test]
    fn line_formats() {
        let el = DataElement::new(Tag::new(0x0028, 0x0010), Vr::US, vec![0, 2]);
        assert_eq!(dump_element(&el), "0028,0010 US 2 512");
        let el = DataElement::new(Tag::new(0x0010, 0x4000), Vr::LT, b"a\r\nb ".to_vec());
        assert_eq!(dump_element(&el), "0010,4000 LT 5 a\\x0d\\x0ab");
        let el = DataElement::new(Tag::new(0x0009, 0x1011), Vr::OB, (0u8..18).collect());
        assert_eq!(
            dump_element(&el),
            "0009,1011 OB 18 000102030405060708090a0b0c0d0e0f..."
        );
        let el = DataElement::new(Tag::new(0x0010, 0x0010), Vr::PN, Vec::new());
        assert_eq!(dump_element(&el), "0010,0010 PN 0");
    }
}
