//! Reader for the native, uncompressed subset of DICOM Part-10 files.

mod dictionary;
mod dump;
mod element;
mod parse;
mod pixel;
mod synth;
mod tag;

pub use dictionary::implicit_vr;
pub use dump::{dump, dump_element};
pub use element::{get_element, DataElement, DataSet, Length, TransferSyntax, Vr};
pub use parse::{parse_file, DicomFile};
pub use pixel::{
    extract_pixel_data, read_pixel_descriptor, Photometric, PixelDescriptor, PixelMatrix,
    PixelRepresentation,
};
pub use synth::{encode_synthetic, SyntheticImage};
pub use tag::{tags, Tag};

#[derive(Debug, thiserror::Error)]
pub enum DicomError {
    #[error("input is {len} bytes, too short for a Part-10 preamble")]
    TooShort { len: usize },
    #[error("missing DICM magic at offset 128")]
    MissingMagic,
    #[error("unsupported transfer syntax {0}")]
    UnsupportedTransferSyntax(String),
    #[error("element {tag} at offset {offset} runs past the end of the input")]
    TruncatedElement { tag: Tag, offset: usize },
    #[error("element {tag} has unknown VR {:?}", String::from_utf8_lossy(code))]
    InvalidVr { tag: Tag, code: [u8; 2] },
    #[error("element {tag} has odd length {length}")]
    OddLength { tag: Tag, length: u32 },
    #[error("element {tag} has undefined length but is not a sequence")]
    UndefinedLength { tag: Tag },
    #[error("malformed sequence near {tag}")]
    MalformedSequence { tag: Tag },
    #[error("tag {tag} follows {previous}; tags must increase")]
    OutOfOrderTag { previous: Tag, tag: Tag },
    #[error("missing required tag {0}")]
    MissingRequiredTag(Tag),
    #[error("unsupported pixel format: {0}")]
    UnsupportedPixelFormat(String),
    #[error("pixel data (7FE0,0010) is missing")]
    PixelDataMissing,
    #[error("pixel data is {actual} bytes, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },
}
