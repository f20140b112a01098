//! Restricted DICOM reader.
//!
//! Only the two uncompressed little-endian transfer syntaxes are accepted
//! (explicit VR and implicit VR). Sequences are skipped whole and parsing
//! stops after Pixel Data. [`writer`] produces files in the same subset and
//! is what the fixtures and round-trip tests are built on.

mod element;
mod series;
mod slice;
pub mod writer;

pub use element::{parse_dicom, DicomElement, ElementMap, Tag, TransferSyntax, Vr};
pub use series::{scan_series, ScanOptions, ScannedSlice, Series, SkippedFile};
pub use slice::{extract_ct_slice, CtSlice};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DicomError {
    #[error("file truncated at offset {offset}")]
    TruncatedFile { offset: usize },
    #[error("unsupported transfer syntax: {0}")]
    UnsupportedTransferSyntax(String),
    #[error("missing DICM magic")]
    MissingMagic,
    #[error("missing required tag {0}")]
    MissingRequiredTag(Tag),
    #[error("malformed value for tag {0}")]
    MalformedValue(Tag),
    #[error("pixel data holds {actual} bytes, expected {expected}")]
    PixelDataSizeMismatch { expected: usize, actual: usize },
    #[error("invalid slice geometry: {0}")]
    InvalidSlice(String),
    #[error("no slices retained from series")]
    EmptySeries,
    #[error("i/o error: {0}")]
    Io(String),
}

pub mod tags {
    //! Tags consumed by the pipeline.
    use super::Tag;

    pub const TRANSFER_SYNTAX_UID: Tag = Tag(0x0002, 0x0010);
    pub const META_GROUP_LENGTH: Tag = Tag(0x0002, 0x0000);
    pub const MODALITY: Tag = Tag(0x0008, 0x0060);
    pub const PATIENT_ID: Tag = Tag(0x0010, 0x0020);
    pub const SLICE_THICKNESS: Tag = Tag(0x0018, 0x0050);
    pub const INSTANCE_NUMBER: Tag = Tag(0x0020, 0x0013);
    pub const ROWS: Tag = Tag(0x0028, 0x0010);
    pub const COLUMNS: Tag = Tag(0x0028, 0x0011);
    pub const BITS_ALLOCATED: Tag = Tag(0x0028, 0x0100);
    pub const BITS_STORED: Tag = Tag(0x0028, 0x0101);
    pub const PIXEL_REPRESENTATION: Tag = Tag(0x0028, 0x0103);
    pub const RESCALE_INTERCEPT: Tag = Tag(0x0028, 0x1052);
    pub const RESCALE_SLOPE: Tag = Tag(0x0028, 0x1053);
    pub const PIXEL_DATA: Tag = Tag(0x7FE0, 0x0010);

    pub const ITEM: Tag = Tag(0xFFFE, 0xE000);
    pub const ITEM_DELIMITATION: Tag = Tag(0xFFFE, 0xE00D);
    pub const SEQUENCE_DELIMITATION: Tag = Tag(0xFFFE, 0xE0DD);
}

pub mod uids {
    pub const IMPLICIT_VR_LE: &str = "1.2.840.10008.1.2";
    pub const EXPLICIT_VR_LE: &str = "1.2.840.10008.1.2.1";
    pub const EXPLICIT_VR_BE: &str = "1.2.840.10008.1.2.2";
}
