//! Encoder for the supported DICOM subset.
//!
//! Used to synthesize fixture series and to check that parsing reproduces
//! element payloads byte for byte.

use super::element::{DicomElement, TransferSyntax, Vr};
use super::{tags, Tag};

enum Entry {
    Element(DicomElement),
    Sequence {
        tag: Tag,
        items: Vec<Vec<DicomElement>>,
        undefined_length: bool,
    },
}

impl Entry {
    fn tag(&self) -> Tag {
        match self {
            Entry::Element(e) => e.tag,
            Entry::Sequence { tag, .. } => *tag,
        }
    }
}

/// Builds one DICOM file. Elements are written in ascending tag order.
pub struct FileBuilder {
    syntax: TransferSyntax,
    preamble: bool,
    entries: Vec<Entry>,
}

impl FileBuilder {
    pub fn new(syntax: TransferSyntax) -> Self {
        Self { syntax, preamble: true, entries: Vec::new() }
    }

    /// Omit preamble, magic and file meta group; the output starts at the
    /// first data set element.
    pub fn without_preamble(mut self) -> Self {
        self.preamble = false;
        self
    }

    pub fn element(mut self, el: DicomElement) -> Self {
        self.entries.push(Entry::Element(el));
        self
    }

    pub fn push(&mut self, el: DicomElement) {
        self.entries.push(Entry::Element(el));
    }

    pub fn sequence(mut self, tag: Tag, items: Vec<Vec<DicomElement>>, undefined_length: bool) -> Self {
        self.entries.push(Entry::Sequence { tag, items, undefined_length });
        self
    }

    pub fn encode(mut self) -> Vec<u8> {
        self.entries.sort_by_key(Entry::tag);
        let mut out = Vec::new();
        if self.preamble {
            out.extend_from_slice(&[0u8; 128]);
            out.extend_from_slice(b"DICM");
            let ts = string_element(tags::TRANSFER_SYNTAX_UID, Vr::UI, self.syntax.uid());
            let mut meta = Vec::new();
            write_element(&mut meta, &ts, true);
            let len = ul_element(tags::META_GROUP_LENGTH, meta.len() as u32);
            write_element(&mut out, &len, true);
            out.extend_from_slice(&meta);
        }
        let explicit = self.syntax == TransferSyntax::ExplicitVrLittleEndian;
        for entry in &self.entries {
            match entry {
                Entry::Element(e) => write_element(&mut out, e, explicit),
                Entry::Sequence { tag, items, undefined_length } => {
                    write_sequence(&mut out, *tag, items, *undefined_length, explicit)
                }
            }
        }
        out
    }
}

fn write_header(out: &mut Vec<u8>, tag: Tag, vr: Vr, len: u32, explicit: bool) {
    out.extend_from_slice(&tag.0.to_le_bytes());
    out.extend_from_slice(&tag.1.to_le_bytes());
    if !explicit {
        out.extend_from_slice(&len.to_le_bytes());
        return;
    }
    out.extend_from_slice(&vr.0);
    if vr.has_long_length() {
        out.extend_from_slice(&[0, 0]);
        out.extend_from_slice(&len.to_le_bytes());
    } else {
        out.extend_from_slice(&(len as u16).to_le_bytes());
    }
}

/// Writes one element; a missing VR is encoded as UN in explicit syntax.
pub fn write_element(out: &mut Vec<u8>, el: &DicomElement, explicit: bool) {
    let vr = el.vr.unwrap_or(Vr::UN);
    write_header(out, el.tag, vr, el.value.len() as u32, explicit);
    out.extend_from_slice(&el.value);
}

fn write_delimiter(out: &mut Vec<u8>, tag: Tag, len: u32) {
    out.extend_from_slice(&tag.0.to_le_bytes());
    out.extend_from_slice(&tag.1.to_le_bytes());
    out.extend_from_slice(&len.to_le_bytes());
}

fn write_sequence(out: &mut Vec<u8>, tag: Tag, items: &[Vec<DicomElement>], undefined: bool, explicit: bool) {
    let mut body = Vec::new();
    for item in items {
        let mut item_body = Vec::new();
        for el in item {
            write_element(&mut item_body, el, explicit);
        }
        if undefined {
            write_delimiter(&mut body, tags::ITEM, u32::MAX);
            body.extend_from_slice(&item_body);
            write_delimiter(&mut body, tags::ITEM_DELIMITATION, 0);
        } else {
            write_delimiter(&mut body, tags::ITEM, item_body.len() as u32);
            body.extend_from_slice(&item_body);
        }
    }
    if undefined {
        write_header(out, tag, Vr::SQ, u32::MAX, explicit);
        out.extend_from_slice(&body);
        write_delimiter(out, tags::SEQUENCE_DELIMITATION, 0);
    } else {
        write_header(out, tag, Vr::SQ, body.len() as u32, explicit);
        out.extend_from_slice(&body);
    }
}

/// String element padded to even length (NUL for UI, space otherwise).
pub fn string_element(tag: Tag, vr: Vr, s: &str) -> DicomElement {
    let mut value = s.as_bytes().to_vec();
    if value.len() % 2 == 1 {
        value.push(if vr == Vr::UI { 0 } else { b' ' });
    }
    DicomElement::new(tag, Some(vr), value)
}

pub fn us_element(tag: Tag, v: u16) -> DicomElement {
    DicomElement::new(tag, Some(Vr::US), v.to_le_bytes().to_vec())
}

pub fn ul_element(tag: Tag, v: u32) -> DicomElement {
    DicomElement::new(tag, Some(Vr::UL), v.to_le_bytes().to_vec())
}

/// Decimal string, formatted so that it parses back to exactly `v`.
pub fn ds_element(tag: Tag, v: f64) -> DicomElement {
    string_element(tag, Vr::DS, &format!("{v}"))
}

pub fn is_element(tag: Tag, v: i64) -> DicomElement {
    string_element(tag, Vr::IS, &v.to_string())
}

/// Pixel Data from signed or unsigned 16-bit words.
pub fn pixel_data_16(words: &[u16]) -> DicomElement {
    let bytes = words.iter().flat_map(|w| w.to_le_bytes()).collect();
    DicomElement::new(tags::PIXEL_DATA, Some(Vr::OW), bytes)
}

/// Header values of a single-frame CT image.
#[derive(Debug, Clone)]
pub struct CtImageSpec {
    pub patient_id: String,
    pub instance_number: i64,
    pub rows: u16,
    pub cols: u16,
    pub slice_thickness_mm: f64,
    pub rescale_slope: f64,
    pub rescale_intercept: f64,
    /// Stored values, row-major, two's complement when signed.
    pub pixels: Vec<i16>,
}

/// Encodes a 16-bit signed CT image with all pipeline tags present.
pub fn encode_ct_image(spec: &CtImageSpec, syntax: TransferSyntax) -> Vec<u8> {
    let words: Vec<u16> = spec.pixels.iter().map(|&p| p as u16).collect();
    FileBuilder::new(syntax)
        .element(string_element(tags::MODALITY, Vr::CS, "CT"))
        .element(string_element(tags::PATIENT_ID, Vr::LO, &spec.patient_id))
        .element(ds_element(tags::SLICE_THICKNESS, spec.slice_thickness_mm))
        .element(is_element(tags::INSTANCE_NUMBER, spec.instance_number))
        .element(us_element(tags::ROWS, spec.rows))
        .element(us_element(tags::COLUMNS, spec.cols))
        .element(us_element(tags::BITS_ALLOCATED, 16))
        .element(us_element(tags::BITS_STORED, 16))
        .element(us_element(tags::PIXEL_REPRESENTATION, 1))
        .element(ds_element(tags::RESCALE_INTERCEPT, spec.rescale_intercept))
        .element(ds_element(tags::RESCALE_SLOPE, spec.rescale_slope))
        .element(pixel_data_16(&words))
        .encode()
}
