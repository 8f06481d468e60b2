use super::dictionary::implicit_vr;
use super::element::{DataElement, DataSet, Length, TransferSyntax, Vr};
use super::tag::{tags, Tag};
use super::DicomError;

const PREAMBLE_LEN: usize = 128;
const MAGIC: &[u8; 4] = b"DICM";
const UNDEFINED: u32 = 0xFFFF_FFFF;
const MAX_SEQUENCE_DEPTH: usize = 32;

/// A Part-10 file split into its meta group and main data set.
#[derive(Debug, Clone, PartialEq)]
pub struct DicomFile {
    pub file_meta: DataSet,
    pub dataset: DataSet,
}

impl DicomFile {
    pub fn transfer_syntax(&self) -> TransferSyntax {
        self.dataset.transfer_syntax
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

struct Header {
    tag: Tag,
    vr: Option<Vr>,
    length: u32,
}

impl<'a> Cursor<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn take(&mut self, n: usize, tag: Tag) -> Result<&'a [u8], DicomError> {
        if n > self.remaining() {
            return Err(DicomError::TruncatedElement {
                tag,
                offset: self.pos,
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u16(&mut self, tag: Tag) -> Result<u16, DicomError> {
        let b = self.take(2, tag)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self, tag: Tag) -> Result<u32, DicomError> {
        let b = self.take(4, tag)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn peek_tag(&self) -> Option<Tag> {
        let b = self.bytes.get(self.pos..self.pos + 4)?;
        Some(Tag::new(
            u16::from_le_bytes([b[0], b[1]]),
            u16::from_le_bytes([b[2], b[3]]),
        ))
    }

    fn tag(&mut self) -> Result<Tag, DicomError> {
        let unknown = Tag::new(0xFFFF, 0xFFFF);
        let group = self.u16(unknown)?;
        let element = self.u16(Tag::new(group, 0xFFFF))?;
        Ok(Tag::new(group, element))
    }

    /// Reads a tag and length, plus the VR under explicit encoding.
    /// Item and delimiter tags never carry a VR.
    fn header(&mut self, explicit: bool) -> Result<Header, DicomError> {
        let tag = self.tag()?;
        if tag.group == 0xFFFE || !explicit {
            let length = self.u32(tag)?;
            return Ok(Header {
                tag,
                vr: None,
                length,
            });
        }
        let code = self.take(2, tag)?;
        let vr = Vr::from_bytes([code[0], code[1]]).ok_or(DicomError::InvalidVr {
            tag,
            code: [code[0], code[1]],
        })?;
        let length = if vr.has_long_length() {
            self.take(2, tag)?;
            self.u32(tag)?
        } else {
            self.u16(tag)? as u32
        };
        Ok(Header {
            tag,
            vr: Some(vr),
            length,
        })
    }

    fn skip(&mut self, n: u32, tag: Tag) -> Result<(), DicomError> {
        self.take(n as usize, tag).map(|_| ())
    }

    /// Skips the items of a sequence whose header has just been read.
    fn skip_sequence(
        &mut self,
        tag: Tag,
        length: u32,
        explicit: bool,
        depth: usize,
    ) -> Result<(), DicomError> {
        if depth > MAX_SEQUENCE_DEPTH {
            return Err(DicomError::MalformedSequence { tag });
        }
        if length != UNDEFINED {
            return self.skip(length, tag);
        }
        loop {
            let item = self.tag()?;
            let item_len = self.u32(item)?;
            match item {
                tags::SEQUENCE_DELIMITATION => return Ok(()),
                tags::ITEM if item_len != UNDEFINED => self.skip(item_len, item)?,
                tags::ITEM => self.skip_item_elements(explicit, depth + 1)?,
                _ => return Err(DicomError::MalformedSequence { tag }),
            }
        }
    }

    /// Skips the elements of an undefined length item up to its delimiter.
    fn skip_item_elements(&mut self, explicit: bool, depth: usize) -> Result<(), DicomError> {
        loop {
            let h = self.header(explicit)?;
            if h.tag == tags::ITEM_DELIMITATION {
                return Ok(());
            }
            if h.tag.group == 0xFFFE {
                return Err(DicomError::MalformedSequence { tag: h.tag });
            }
            if h.length == UNDEFINED {
                self.skip_sequence(h.tag, h.length, explicit, depth)?;
            } else {
                self.skip(h.length, h.tag)?;
            }
        }
    }

    fn element(&mut self, explicit: bool) -> Result<DataElement, DicomError> {
        let h = self.header(explicit)?;
        if h.tag.group == 0xFFFE {
            return Err(DicomError::MalformedSequence { tag: h.tag });
        }
        let mut vr = h.vr.unwrap_or_else(|| implicit_vr(h.tag));
        if h.length == UNDEFINED {
            // Undefined length is only legal for sequences in native encodings;
            // UN with undefined length is an implicitly encoded sequence.
            let looks_like_sequence = matches!(vr, Vr::SQ | Vr::UN);
            if !looks_like_sequence {
                return Err(DicomError::UndefinedLength { tag: h.tag });
            }
            vr = Vr::SQ;
            self.skip_sequence(h.tag, h.length, explicit, 0)?;
            return Ok(DataElement {
                tag: h.tag,
                vr,
                length: Length::Undefined,
                value: Vec::new(),
            });
        }
        if h.length % 2 == 1 {
            return Err(DicomError::OddLength {
                tag: h.tag,
                length: h.length,
            });
        }
        if vr == Vr::SQ {
            self.skip_sequence(h.tag, h.length, explicit, 0)?;
            return Ok(DataElement {
                tag: h.tag,
                vr,
                length: Length::Defined(h.length),
                value: Vec::new(),
            });
        }
        let value = self.take(h.length as usize, h.tag)?.to_vec();
        Ok(DataElement {
            tag: h.tag,
            vr,
            length: Length::Defined(h.length),
            value,
        })
    }
}

fn push_ordered(set: &mut DataSet, element: DataElement) -> Result<(), DicomError> {
    if let Some(previous) = set.last_tag() {
        if element.tag <= previous {
            return Err(DicomError::OutOfOrderTag {
                previous,
                tag: element.tag,
            });
        }
    }
    set.insert(element);
    Ok(())
}

/// Parses a DICOM Part-10 file in implicit or explicit VR little endian.
pub fn parse_file(bytes: &[u8]) -> Result<DicomFile, DicomError> {
    if bytes.len() < PREAMBLE_LEN + MAGIC.len() {
        return Err(DicomError::TooShort { len: bytes.len() });
    }
    if &bytes[PREAMBLE_LEN..PREAMBLE_LEN + 4] != MAGIC {
        return Err(DicomError::MissingMagic);
    }
    let mut cursor = Cursor {
        bytes,
        pos: PREAMBLE_LEN + 4,
    };

    let mut file_meta = DataSet::new(TransferSyntax::ExplicitVrLittleEndian);
    while cursor.peek_tag().is_some_and(|t| t.group == 0x0002) {
        let el = cursor.element(true)?;
        push_ordered(&mut file_meta, el)?;
    }

    let uid = file_meta
        .get_str(tags::TRANSFER_SYNTAX_UID)
        .ok_or(DicomError::MissingRequiredTag(tags::TRANSFER_SYNTAX_UID))?;
    let syntax =
        TransferSyntax::from_uid(&uid).ok_or(DicomError::UnsupportedTransferSyntax(uid))?;
    let explicit = syntax == TransferSyntax::ExplicitVrLittleEndian;

    let mut dataset = DataSet::new(syntax);
    while !cursor.at_end() {
        let el = cursor.element(explicit)?;
        push_ordered(&mut dataset, el)?;
    }
    Ok(DicomFile { file_meta, dataset })
}
