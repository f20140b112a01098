use std::collections::BTreeMap;
use std::fmt;

use super::{tags, uids, DicomError};

/// (group, element) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag(pub u16, pub u16);

impl Tag {
    pub fn group(self) -> u16 {
        self.0
    }

    pub fn element(self) -> u16 {
        self.1
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:04X},{:04X})", self.0, self.1)
    }
}

/// Two-letter value representation code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Vr(pub [u8; 2]);

const KNOWN_VRS: [&[u8; 2]; 34] = [
    b"AE", b"AS", b"AT", b"CS", b"DA", b"DS", b"DT", b"FD", b"FL", b"IS", b"LO", b"LT", b"OB",
    b"OD", b"OF", b"OL", b"OV", b"OW", b"PN", b"SH", b"SL", b"SQ", b"SS", b"ST", b"SV", b"TM",
    b"UC", b"UI", b"UL", b"UN", b"UR", b"US", b"UT", b"UV",
];

impl Vr {
    pub const OB: Vr = Vr(*b"OB");
    pub const OW: Vr = Vr(*b"OW");
    pub const SQ: Vr = Vr(*b"SQ");
    pub const UN: Vr = Vr(*b"UN");
    pub const US: Vr = Vr(*b"US");
    pub const UL: Vr = Vr(*b"UL");
    pub const UI: Vr = Vr(*b"UI");
    pub const DS: Vr = Vr(*b"DS");
    pub const IS: Vr = Vr(*b"IS");
    pub const LO: Vr = Vr(*b"LO");
    pub const CS: Vr = Vr(*b"CS");

    pub fn is_known(self) -> bool {
        KNOWN_VRS.iter().any(|v| **v == self.0)
    }

    /// VRs encoded with two reserved bytes and a 32-bit length in explicit VR.
    pub fn has_long_length(self) -> bool {
        matches!(
            &self.0,
            b"OB" | b"OD" | b"OF" | b"OL" | b"OV" | b"OW" | b"SQ" | b"SV" | b"UC" | b"UN" | b"UR"
                | b"UT" | b"UV"
        )
    }

    /// Character-string VRs, which are space/NUL padded to even length.
    pub fn is_string(self) -> bool {
        matches!(
            &self.0,
            b"AE" | b"AS" | b"CS" | b"DA" | b"DS" | b"DT" | b"IS" | b"LO" | b"LT" | b"PN" | b"SH"
                | b"ST" | b"TM" | b"UC" | b"UI" | b"UR" | b"UT"
        )
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).unwrap_or("??")
    }
}

impl fmt::Display for Vr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DicomElement {
    pub tag: Tag,
    /// Absent for elements read from an implicit-VR data set.
    pub vr: Option<Vr>,
    pub value: Vec<u8>,
}

impl DicomElement {
    pub fn new(tag: Tag, vr: Option<Vr>, value: Vec<u8>) -> Self {
        Self { tag, vr, value }
    }

    /// Value as text with trailing NUL/space padding removed.
    pub fn as_trimmed_str(&self) -> Option<&str> {
        let s = std::str::from_utf8(&self.value).ok()?;
        Some(s.trim_matches(|c: char| c == '\0' || c == ' '))
    }

    pub fn as_u16(&self) -> Option<u16> {
        let b = self.value.get(..2)?;
        Some(u16::from_le_bytes([b[0], b[1]]))
    }
}

pub type ElementMap = BTreeMap<Tag, DicomElement>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferSyntax {
    ExplicitVrLittleEndian,
    ImplicitVrLittleEndian,
}

impl TransferSyntax {
    pub fn uid(self) -> &'static str {
        match self {
            TransferSyntax::ExplicitVrLittleEndian => uids::EXPLICIT_VR_LE,
            TransferSyntax::ImplicitVrLittleEndian => uids::IMPLICIT_VR_LE,
        }
    }

    pub fn from_uid(uid: &str) -> Result<Self, DicomError> {
        match uid {
            uids::EXPLICIT_VR_LE => Ok(TransferSyntax::ExplicitVrLittleEndian),
            uids::IMPLICIT_VR_LE => Ok(TransferSyntax::ImplicitVrLittleEndian),
            other => Err(DicomError::UnsupportedTransferSyntax(other.to_string())),
        }
    }

    fn is_explicit(self) -> bool {
        self == TransferSyntax::ExplicitVrLittleEndian
    }
}

const PREAMBLE_LEN: usize = 128;
const UNDEFINED_LENGTH: u32 = 0xFFFF_FFFF;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

struct Header {
    tag: Tag,
    vr: Option<Vr>,
    len: u32,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn truncated(&self) -> DicomError {
        DicomError::TruncatedFile { offset: self.buf.len() }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DicomError> {
        if n > self.remaining() {
            return Err(self.truncated());
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u16(&mut self) -> Result<u16, DicomError> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, DicomError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn peek_group(&self) -> Option<u16> {
        let b = self.buf.get(self.pos..self.pos + 2)?;
        Some(u16::from_le_bytes([b[0], b[1]]))
    }

    fn header(&mut self, explicit: bool) -> Result<Header, DicomError> {
        let tag = Tag(self.u16()?, self.u16()?);
        // Item and delimiter tags never carry a VR.
        if tag.group() == 0xFFFE || !explicit {
            let len = self.u32()?;
            return Ok(Header { tag, vr: None, len });
        }
        let code = self.take(2)?;
        let vr = Vr([code[0], code[1]]);
        let len = if vr.has_long_length() {
            self.take(2)?;
            self.u32()?
        } else {
            u32::from(self.u16()?)
        };
        Ok(Header { tag, vr: Some(vr), len })
    }

    fn skip(&mut self, len: u32) -> Result<(), DicomError> {
        self.take(len as usize).map(|_| ())
    }

    /// Skips an undefined-length sequence up to and including its delimiter.
    fn skip_sequence(&mut self, explicit: bool) -> Result<(), DicomError> {
        loop {
            let h = self.header(explicit)?;
            match h.tag {
                tags::SEQUENCE_DELIMITATION => return Ok(()),
                tags::ITEM if h.len == UNDEFINED_LENGTH => self.skip_item(explicit)?,
                tags::ITEM => self.skip(h.len)?,
                // Malformed: element directly inside a sequence. Skip it anyway.
                _ => self.skip_value(&h, explicit)?,
            }
        }
    }

    fn skip_item(&mut self, explicit: bool) -> Result<(), DicomError> {
        loop {
            let h = self.header(explicit)?;
            if h.tag == tags::ITEM_DELIMITATION {
                return Ok(());
            }
            self.skip_value(&h, explicit)?;
        }
    }

    fn skip_value(&mut self, h: &Header, explicit: bool) -> Result<(), DicomError> {
        if h.len == UNDEFINED_LENGTH {
            self.skip_sequence(explicit)
        } else {
            self.skip(h.len)
        }
    }
}

const ITEM_TAG_BYTES: [u8; 4] = [0xFE, 0xFF, 0x00, 0xE0];

/// Parses a DICOM file of the supported subset into its element map.
///
/// The map holds every element read up to and including Pixel Data,
/// file meta elements included. Sequence elements are not retained.
pub fn parse_dicom(bytes: &[u8]) -> Result<ElementMap, DicomError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if bytes.len() >= PREAMBLE_LEN + 4 && &bytes[PREAMBLE_LEN..PREAMBLE_LEN + 4] == b"DICM" {
        r.pos = PREAMBLE_LEN + 4;
    } else if matches!(r.peek_group(), Some(0x0002) | Some(0x0008)) {
        r.pos = 0;
    } else if bytes.len() < PREAMBLE_LEN + 4 {
        return Err(r.truncated());
    } else {
        return Err(DicomError::MissingMagic);
    }

    let mut map = ElementMap::new();
    let mut syntax = None;

    while r.peek_group() == Some(0x0002) {
        let h = r.header(true)?;
        if h.len == UNDEFINED_LENGTH {
            r.skip_sequence(true)?;
            continue;
        }
        let value = r.take(h.len as usize)?.to_vec();
        let el = DicomElement::new(h.tag, h.vr, value);
        if h.tag == tags::TRANSFER_SYNTAX_UID {
            let uid = el.as_trimmed_str().unwrap_or_default();
            syntax = Some(TransferSyntax::from_uid(uid)?);
        }
        map.insert(h.tag, el);
    }

    let syntax = match syntax {
        Some(s) => s,
        None => detect_syntax(&r),
    };
    let explicit = syntax.is_explicit();

    loop {
        if r.remaining() == 0 {
            // Every image file ends with Pixel Data; running out early is truncation.
            return Err(r.truncated());
        }
        let h = r.header(explicit)?;
        if h.tag == tags::PIXEL_DATA {
            if h.len == UNDEFINED_LENGTH {
                return Err(DicomError::UnsupportedTransferSyntax(
                    "encapsulated pixel data".to_string(),
                ));
            }
            let value = r.take(h.len as usize)?.to_vec();
            map.insert(h.tag, DicomElement::new(h.tag, h.vr, value));
            return Ok(map);
        }
        let is_sequence = h.vr == Some(Vr::SQ) || h.len == UNDEFINED_LENGTH;
        if is_sequence {
            r.skip_value(&h, explicit)?;
            continue;
        }
        let value = r.take(h.len as usize)?;
        // Implicit VR carries no SQ code; a defined-length sequence shows up
        // as a value that opens with an item tag.
        if !explicit && value.starts_with(&ITEM_TAG_BYTES) {
            continue;
        }
        map.insert(h.tag, DicomElement::new(h.tag, h.vr, value.to_vec()));
    }
}

/// Meta-less data sets: explicit VR if a known VR code follows the first tag.
fn detect_syntax(r: &Reader<'_>) -> TransferSyntax {
    let code = r.buf.get(r.pos + 4..r.pos + 6);
    match code {
        Some(c) if Vr([c[0], c[1]]).is_known() => TransferSyntax::ExplicitVrLittleEndian,
        _ => TransferSyntax::ImplicitVrLittleEndian,
    }
}
