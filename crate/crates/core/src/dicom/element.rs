use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::tag::Tag;

/// Value representations understood by the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vr {
    AE,
    AS,
    CS,
    DA,
    DS,
    DT,
    IS,
    LO,
    LT,
    OB,
    OW,
    PN,
    SH,
    SL,
    SQ,
    SS,
    ST,
    TM,
    UI,
    UL,
    US,
    UN,
}

impl Vr {
    pub fn from_bytes(code: [u8; 2]) -> Option<Self> {
        use Vr::*;
        Some(match &code {
            b"AE" => AE,
            b"AS" => AS,
            b"CS" => CS,
            b"DA" => DA,
            b"DS" => DS,
            b"DT" => DT,
            b"IS" => IS,
            b"LO" => LO,
            b"LT" => LT,
            b"OB" => OB,
            b"OW" => OW,
            b"PN" => PN,
            b"SH" => SH,
            b"SL" => SL,
            b"SQ" => SQ,
            b"SS" => SS,
            b"ST" => ST,
            b"TM" => TM,
            b"UI" => UI,
            b"UL" => UL,
            b"US" => US,
            b"UN" => UN,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        use Vr::*;
        match self {
            AE => "AE",
            AS => "AS",
            CS => "CS",
            DA => "DA",
            DS => "DS",
            DT => "DT",
            IS => "IS",
            LO => "LO",
            LT => "LT",
            OB => "OB",
            OW => "OW",
            PN => "PN",
            SH => "SH",
            SL => "SL",
            SQ => "SQ",
            SS => "SS",
            ST => "ST",
            TM => "TM",
            UI => "UI",
            UL => "UL",
            US => "US",
            UN => "UN",
        }
    }

    /// Explicit VR encodings with a reserved 2 bytes and a 32-bit length.
    pub fn has_long_length(self) -> bool {
        matches!(self, Vr::OB | Vr::OW | Vr::SQ | Vr::UN)
    }

    pub fn is_string(self) -> bool {
        use Vr::*;
        matches!(
            self,
            AE | AS | CS | DA | DS | DT | IS | LO | LT | PN | SH | ST | TM | UI
        )
    }
}

impl fmt::Display for Vr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Declared element length. Only sequences may carry the undefined marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Length {
    Defined(u32),
    Undefined,
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Length::Defined(n) => write!(f, "{n}"),
            Length::Undefined => f.write_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataElement {
    pub tag: Tag,
    pub vr: Vr,
    pub length: Length,
    /// Raw value bytes. Empty for skipped sequences.
    pub value: Vec<u8>,
}

impl DataElement {
    pub fn new(tag: Tag, vr: Vr, value: Vec<u8>) -> Self {
        Self {
            tag,
            vr,
            length: Length::Defined(value.len() as u32),
            value,
        }
    }

    /// The value as text, with trailing space and NUL padding removed.
    pub fn as_str(&self) -> Option<String> {
        if !self.vr.is_string() {
            return None;
        }
        let trimmed = trim_padding(&self.value);
        // Latin-1: every byte maps to the code point of the same value.
        Some(trimmed.iter().map(|&b| b as char).collect())
    }

    /// Backslash separated values, each trimmed of surrounding spaces.
    pub fn strings(&self) -> Option<Vec<String>> {
        let text = self.as_str()?;
        if text.is_empty() {
            return Some(Vec::new());
        }
        Some(text.split('\\').map(|s| s.trim().to_string()).collect())
    }

    /// Integer values for binary integer VRs and for IS strings.
    pub fn ints(&self) -> Option<Vec<i64>> {
        let v = &self.value;
        match self.vr {
            Vr::US => Some(
                v.chunks_exact(2)
                    .map(|c| u16::from_le_bytes([c[0], c[1]]) as i64)
                    .collect(),
            ),
            Vr::SS => Some(
                v.chunks_exact(2)
                    .map(|c| i16::from_le_bytes([c[0], c[1]]) as i64)
                    .collect(),
            ),
            Vr::UL => Some(
                v.chunks_exact(4)
                    .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]) as i64)
                    .collect(),
            ),
            Vr::SL => Some(
                v.chunks_exact(4)
                    .map(|c| i32::from_le_bytes([c[0], c[1], c[2], c[3]]) as i64)
                    .collect(),
            ),
            Vr::IS => self
                .strings()?
                .iter()
                .map(|s| i64::from_str(s).ok())
                .collect(),
            _ => None,
        }
    }

    pub fn first_int(&self) -> Option<i64> {
        self.ints()?.first().copied()
    }

    /// Decimal values for DS strings (and any numeric VR).
    pub fn decimals(&self) -> Option<Vec<f64>> {
        match self.vr {
            Vr::DS => self
                .strings()?
                .iter()
                .map(|s| f64::from_str(s).ok().filter(|x| x.is_finite()))
                .collect(),
            _ => self
                .ints()
                .map(|v| v.into_iter().map(|x| x as f64).collect()),
        }
    }

    pub fn first_decimal(&self) -> Option<f64> {
        self.decimals()?.first().copied()
    }
}

pub(crate) fn trim_padding(bytes: &[u8]) -> &[u8] {
    let end = bytes
        .iter()
        .rposition(|&b| b != b' ' && b != 0)
        .map_or(0, |i| i + 1);
    &bytes[..end]
}

/// Encoding rule of the main data set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferSyntax {
    ImplicitVrLittleEndian,
    ExplicitVrLittleEndian,
}

impl TransferSyntax {
    pub const IMPLICIT_UID: &'static str = "1.2.840.10008.1.2";
    pub const EXPLICIT_UID: &'static str = "1.2.840.10008.1.2.1";

    pub fn from_uid(uid: &str) -> Option<Self> {
        match uid {
            Self::IMPLICIT_UID => Some(Self::ImplicitVrLittleEndian),
            Self::EXPLICIT_UID => Some(Self::ExplicitVrLittleEndian),
            _ => None,
        }
    }

    pub fn uid(self) -> &'static str {
        match self {
            Self::ImplicitVrLittleEndian => Self::IMPLICIT_UID,
            Self::ExplicitVrLittleEndian => Self::EXPLICIT_UID,
        }
    }
}

/// Parsed attributes in tag order.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    elements: BTreeMap<Tag, DataElement>,
    pub transfer_syntax: TransferSyntax,
}

impl DataSet {
    pub fn new(transfer_syntax: TransferSyntax) -> Self {
        Self {
            elements: BTreeMap::new(),
            transfer_syntax,
        }
    }

    /// Inserts an element, replacing any previous element with the same tag.
    pub fn insert(&mut self, element: DataElement) -> Option<DataElement> {
        self.elements.insert(element.tag, element)
    }

    pub fn get(&self, tag: Tag) -> Option<&DataElement> {
        self.elements.get(&tag)
    }

    pub fn iter(&self) -> impl Iterator<Item = &DataElement> {
        self.elements.values()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn last_tag(&self) -> Option<Tag> {
        self.elements.keys().next_back().copied()
    }

    pub fn get_str(&self, tag: Tag) -> Option<String> {
        self.get(tag).and_then(DataElement::as_str)
    }
}

/// Looks up an element; absence is not an error.
pub fn get_element(dataset: &DataSet, tag: Tag) -> Option<&DataElement> {
    dataset.get(tag)
}
