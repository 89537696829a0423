//! Bit-exact vertex labels.
//!
//! Layout, with every numeric field `s` bits wide unless noted and every
//! identifier stored as `id - 1`:
//!
//! ```text
//! 1^s 000111000 d |A| (id d)*                      base block
//! nch
//! ( 0^s u v flags[2] pred? succ child parent (mclen[32] mc)? )*   channels
//! evflag[1] (evlen[32] ev)?                        evaluation-tree payload
//! ```
//!
//! `child` and `parent` are cargo tuples `id d |A| (id d)*`. Flag bit 0 marks
//! a predecessor, flag bit 1 an attached payload. Byte strings are stored as
//! a 32-bit byte count followed by the bytes, most significant bit first.

use bitvec::prelude::*;
use thiserror::Error;

use crate::graph::VertexId;

pub const DELIMITER: [bool; 9] = [false, false, false, true, true, true, false, false, false];
/// Upper bound on `s`; ids are 32-bit.
pub const MAX_S: u32 = 32;
const LEN_BITS: u32 = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelError {
    #[error("value {value} does not fit in {width} bits")]
    Overflow { value: u64, width: u32 },
    #[error("label is empty or has no leading ones")]
    NoPrefix,
    #[error("field width {0} out of range")]
    BadWidth(u32),
    #[error("delimiter missing")]
    BadDelimiter,
    #[error("label ends inside a field")]
    Truncated,
    #[error("{0} entries exceed the bound")]
    TooMany(u64),
    #[error("channel separator missing")]
    BadSeparator,
    #[error("channel names a vertex as its own parent")]
    SelfChannel,
    #[error("{0} bits left after the last field")]
    Trailing(usize),
    #[error("label file: {0}")]
    File(String),
}

/// A sequence of bits, stored packed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: BitVec<u8, Msb0>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString {
            bits: bits.into_iter().collect(),
        }
    }

    /// Parses a string of `0`/`1` characters; other characters are skipped.
    pub fn from_text(text: &str) -> Self {
        BitString {
            bits: text
                .chars()
                .filter_map(|c| match c {
                    '0' => Some(false),
                    '1' => Some(true),
                    _ => None,
                })
                .collect(),
        }
    }

    /// Unpacks the first `len` bits of `bytes`, most significant bit first.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Option<Self> {
        if len > bytes.len() * 8 {
            return None;
        }
        let mut bits = BitVec::from_slice(bytes);
        bits.truncate(len);
        Some(BitString { bits })
    }

    /// Packs the bits most significant first, zero padding the last byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bits = self.bits.clone();
        bits.set_uninitialized(false);
        bits.into_vec()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &BitSlice<u8, Msb0> {
        &self.bits
    }

    pub fn bits_mut(&mut self) -> &mut BitVec<u8, Msb0> {
        &mut self.bits
    }

    pub fn flip(&mut self, i: usize) {
        let b = self.bits[i];
        self.bits.set(i, !b);
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in self.bits.iter().by_vals() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Appends bits, most significant first, into a byte buffer.
#[derive(Default)]
pub struct BitWriter {
    buf: Vec<u8>,
    len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit(&mut self, b: bool) {
        self.put(b as u64, 1);
    }

    pub fn bits(&mut self, bs: &[bool]) {
        for &b in bs {
            self.bit(b);
        }
    }

    /// Low `width` bits of `value`; the caller guarantees they fit.
    fn put(&mut self, value: u64, mut width: u32) {
        while width > 0 {
            let used = (self.len % 8) as u32;
            if used == 0 {
                self.buf.push(0);
            }
            let free = 8 - used;
            let take = free.min(width);
            let chunk = (value >> (width - take)) & ((1u64 << take) - 1);
            *self.buf.last_mut().expect("pushed above") |= (chunk as u8) << (free - take);
            self.len += take as usize;
            width -= take;
        }
    }

    /// Writes `value` in exactly `width` bits, most significant first.
    pub fn uint(&mut self, value: u64, width: u32) -> Result<(), LabelError> {
        if width > 64 {
            return Err(LabelError::BadWidth(width));
        }
        if width < 64 && value >> width != 0 {
            return Err(LabelError::Overflow { value, width });
        }
        if width == 64 {
            self.put(value >> 32, 32);
            self.put(value & 0xFFFF_FFFF, 32);
        } else {
            self.put(value, width);
        }
        Ok(())
    }

    /// Elias-gamma code of `value >= 1`.
    pub fn gamma(&mut self, value: u64) {
        debug_assert!(value >= 1);
        let width = 64 - value.leading_zeros();
        for _ in 1..width {
            self.put(0, 1);
        }
        self.uint(value, width).expect("value fits its own width");
    }

    /// The first `bits` bits of `data`.
    pub fn append(&mut self, data: &[u8], bits: usize) {
        let whole = bits / 8;
        if self.len % 8 == 0 {
            self.buf.extend_from_slice(&data[..whole]);
            self.len += whole * 8;
        } else {
            let shift = self.len % 8;
            let mut partial = self.buf.pop().expect("partial byte");
            self.buf.reserve(whole + 1);
            let chunks = data[..whole].chunks_exact(8);
            let tail = chunks.remainder();
            for c in chunks {
                let w = u64::from_be_bytes(c.try_into().expect("eight bytes"));
                let out = (partial as u64) << 56 | w >> shift;
                self.buf.extend_from_slice(&out.to_be_bytes());
                partial = (w as u8) << (8 - shift);
            }
            for &byte in tail {
                self.buf.push(partial | byte >> shift);
                partial = byte << (8 - shift);
            }
            self.buf.push(partial);
            self.len += whole * 8;
        }
        let rest = (bits % 8) as u32;
        if rest > 0 {
            self.put((data[whole] >> (8 - rest)) as u64, rest);
        }
    }

    pub fn bytes(&mut self, data: &[u8]) -> Result<(), LabelError> {
        self.uint(data.len() as u64, LEN_BITS)?;
        self.append(data, data.len() * 8);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The bytes written so far, zero padded, and the bit length.
    pub fn into_parts(self) -> (Vec<u8>, usize) {
        (self.buf, self.len)
    }

    pub fn finish(self) -> BitString {
        let mut bits = BitVec::from_vec(self.buf);
        bits.truncate(self.len);
        BitString { bits }
    }
}

/// Reads bits, most significant first, from a byte buffer.
#[derive(Clone)]
pub struct BitReader<'a> {
    data: &'a [u8],
    len: usize,
    pos: usize,
}

impl<'a> BitReader<'a> {
    /// The first `len` bits of `data`.
    pub fn new(data: &'a [u8], len: usize) -> Self {
        debug_assert!(len <= data.len() * 8);
        BitReader { data, len, pos: 0 }
    }

    pub fn of(bits: &'a BitString) -> Self {
        Self::new(bits.bits.as_raw_slice(), bits.len())
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.len - self.pos
    }

    pub fn bit(&mut self) -> Result<bool, LabelError> {
        Ok(self.uint(1)? == 1)
    }

    fn take(&mut self, mut width: u32) -> u64 {
        let mut v = 0u64;
        while width > 0 {
            let used = (self.pos % 8) as u32;
            let avail = 8 - used;
            let take = avail.min(width);
            let byte = self.data[self.pos / 8] as u64;
            let chunk = (byte >> (avail - take)) & ((1u64 << take) - 1);
            v = v << take | chunk;
            self.pos += take as usize;
            width -= take;
        }
        v
    }

    pub fn uint(&mut self, width: u32) -> Result<u64, LabelError> {
        if width > 64 {
            return Err(LabelError::BadWidth(width));
        }
        if self.remaining() < width as usize {
            return Err(LabelError::Truncated);
        }
        Ok(self.take(width))
    }

    pub fn gamma(&mut self) -> Result<u64, LabelError> {
        let mut zeros = 0;
        while !self.bit()? {
            zeros += 1;
            if zeros >= 64 {
                return Err(LabelError::Truncated);
            }
        }
        let rest = self.uint(zeros)?;
        Ok(1 << zeros | rest)
    }

    pub fn bytes(&mut self) -> Result<Vec<u8>, LabelError> {
        let len = self.uint(LEN_BITS)? as usize;
        if self.remaining() < len.saturating_mul(8) {
            return Err(LabelError::Truncated);
        }
        if self.pos % 8 == 0 {
            let start = self.pos / 8;
            self.pos += len * 8;
            return Ok(self.data[start..start + len].to_vec());
        }
        let (start, shift) = (self.pos / 8, (self.pos % 8) as u32);
        self.pos += len * 8;
        let src = &self.data[start..start + len + 1];
        let mut out = Vec::with_capacity(len);
        let mut chunks = src.windows(9).step_by(8);
        for _ in 0..len / 8 {
            let w = chunks.next().expect("len + 1 source bytes");
            let hi = u64::from_be_bytes(w[..8].try_into().expect("eight bytes"));
            out.extend_from_slice(&(hi << shift | (w[8] >> (8 - shift)) as u64).to_be_bytes());
        }
        for i in len / 8 * 8..len {
            out.push((src[i] << shift) | (src[i + 1] >> (8 - shift)));
        }
        Ok(out)
    }

    pub fn expect_end(&self) -> Result<(), LabelError> {
        match self.remaining() {
            0 => Ok(()),
            r => Err(LabelError::Trailing(r)),
        }
    }
}

/// `ceil(log2 n)`; zero for `n <= 1`.
pub fn id_width(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// A vertex together with its depth and its `(ancestor, depth)` list.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Tuple {
    pub id: VertexId,
    pub depth: u32,
    pub anc: Vec<(VertexId, u32)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChannelBlock {
    pub child: VertexId,
    pub parent: VertexId,
    pub pred: Option<VertexId>,
    pub succ: VertexId,
    pub cargo_child: Tuple,
    pub cargo_parent: Tuple,
    pub mc_cargo: Option<Vec<u8>>,
}

/// Decoded content of a label.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LabelView {
    pub s: u32,
    pub depth: u32,
    /// `(id, depth)` of every strict ancestor in `str(v)`, by increasing depth.
    pub anc: Vec<(VertexId, u32)>,
    pub channels: Vec<ChannelBlock>,
    pub evaltree: Option<Vec<u8>>,
}

fn put_id(w: &mut BitWriter, id: VertexId, s: u32) -> Result<(), LabelError> {
    if id == 0 {
        return Err(LabelError::Overflow { value: 0, width: s });
    }
    w.uint(id as u64 - 1, s)
}

fn get_id(r: &mut BitReader, s: u32) -> Result<VertexId, LabelError> {
    Ok(r.uint(s)? as VertexId + 1)
}

fn put_anc(w: &mut BitWriter, anc: &[(VertexId, u32)], s: u32) -> Result<(), LabelError> {
    w.uint(anc.len() as u64, s)?;
    for &(id, d) in anc {
        put_id(w, id, s)?;
        w.uint(d as u64, s)?;
    }
    Ok(())
}

fn get_anc(r: &mut BitReader, s: u32, omega: usize) -> Result<Vec<(VertexId, u32)>, LabelError> {
    let count = r.uint(s)?;
    if count > omega as u64 {
        return Err(LabelError::TooMany(count));
    }
    (0..count)
        .map(|_| Ok((get_id(r, s)?, r.uint(s)? as u32)))
        .collect()
}

fn put_tuple(w: &mut BitWriter, t: &Tuple, s: u32) -> Result<(), LabelError> {
    put_id(w, t.id, s)?;
    w.uint(t.depth as u64, s)?;
    put_anc(w, &t.anc, s)
}

fn get_tuple(r: &mut BitReader, s: u32, omega: usize) -> Result<Tuple, LabelError> {
    Ok(Tuple {
        id: get_id(r, s)?,
        depth: r.uint(s)? as u32,
        anc: get_anc(r, s, omega)?,
    })
}

/// Encodes `view` with field width `view.s`.
pub fn encode_label(view: &LabelView) -> Result<BitString, LabelError> {
    let s = view.s;
    if s == 0 || s > MAX_S {
        return Err(LabelError::BadWidth(s));
    }
    let mut w = BitWriter::new();
    for _ in 0..s {
        w.bit(true);
    }
    w.bits(&DELIMITER);
    w.uint(view.depth as u64, s)?;
    put_anc(&mut w, &view.anc, s)?;
    w.uint(view.channels.len() as u64, s)?;
    for ch in &view.channels {
        w.uint(0, s)?;
        put_id(&mut w, ch.child, s)?;
        put_id(&mut w, ch.parent, s)?;
        w.bit(ch.mc_cargo.is_some());
        w.bit(ch.pred.is_some());
        if let Some(p) = ch.pred {
            put_id(&mut w, p, s)?;
        }
        put_id(&mut w, ch.succ, s)?;
        put_tuple(&mut w, &ch.cargo_child, s)?;
        put_tuple(&mut w, &ch.cargo_parent, s)?;
        if let Some(mc) = &ch.mc_cargo {
            w.bytes(mc)?;
        }
    }
    w.bit(view.evaltree.is_some());
    if let Some(ev) = &view.evaltree {
        w.bytes(ev)?;
    }
    Ok(w.finish())
}

/// Decodes a label, rejecting anything that is not exactly one legal label
/// with at most `omega` ancestors per tuple and at most `omega` channels.
pub fn decode_label(bits: &BitString, omega: usize) -> Result<LabelView, LabelError> {
    let s = bits.bits().leading_ones() as u32;
    if s == 0 {
        return Err(LabelError::NoPrefix);
    }
    if s > MAX_S {
        return Err(LabelError::BadWidth(s));
    }
    let mut r = BitReader::of(bits);
    r.pos = s as usize;
    for &d in &DELIMITER {
        if r.bit().map_err(|_| LabelError::BadDelimiter)? != d {
            return Err(LabelError::BadDelimiter);
        }
    }
    let depth = r.uint(s)? as u32;
    let anc = get_anc(&mut r, s, omega)?;
    let nch = r.uint(s)?;
    if nch > omega as u64 {
        return Err(LabelError::TooMany(nch));
    }
    let mut channels = Vec::with_capacity(nch as usize);
    for _ in 0..nch {
        if r.uint(s)? != 0 {
            return Err(LabelError::BadSeparator);
        }
        let child = get_id(&mut r, s)?;
        let parent = get_id(&mut r, s)?;
        if child == parent {
            return Err(LabelError::SelfChannel);
        }
        let has_mc = r.bit()?;
        let has_pred = r.bit()?;
        let pred = if has_pred { Some(get_id(&mut r, s)?) } else { None };
        let succ = get_id(&mut r, s)?;
        let cargo_child = get_tuple(&mut r, s, omega)?;
        let cargo_parent = get_tuple(&mut r, s, omega)?;
        let mc_cargo = if has_mc { Some(r.bytes()?) } else { None };
        channels.push(ChannelBlock {
            child,
            parent,
            pred,
            succ,
            cargo_child,
            cargo_parent,
            mc_cargo,
        });
    }
    let evaltree = if r.bit()? { Some(r.bytes()?) } else { None };
    r.expect_end()?;
    Ok(LabelView {
        s,
        depth,
        anc,
        channels,
        evaltree,
    })
}

/// Bits taken by the base block for `|A| = a`.
pub fn base_block_bits(s: u32, a: usize) -> usize {
    s as usize * (2 + 2 * a) + DELIMITER.len() + s as usize
}

/// Serializes a labeling as records `id[u32 BE] len[u32 BE] bits`, with the
/// bits packed most significant first and zero padded to a byte boundary.
pub fn write_labels(labels: &[BitString]) -> Vec<u8> {
    let mut out = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        out.extend_from_slice(&(i as u32 + 1).to_be_bytes());
        out.extend_from_slice(&(l.len() as u32).to_be_bytes());
        out.extend_from_slice(&l.to_bytes());
    }
    out
}

/// Reads a labeling for vertices `1..=n`; every vertex needs one record.
pub fn read_labels(data: &[u8], n: usize) -> Result<Vec<BitString>, LabelError> {
    let mut out: Vec<Option<BitString>> = vec![None; n];
    let mut pos = 0;
    let word = |pos: usize| -> Result<u32, LabelError> {
        data.get(pos..pos + 4)
            .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
            .ok_or_else(|| LabelError::File("truncated record header".into()))
    };
    while pos < data.len() {
        let id = word(pos)? as usize;
        let len = word(pos + 4)? as usize;
        pos += 8;
        let nbytes = len.div_ceil(8);
        let body = data
            .get(pos..pos + nbytes)
            .ok_or_else(|| LabelError::File(format!("truncated label for vertex {id}")))?;
        pos += nbytes;
        if id == 0 || id > n {
            return Err(LabelError::File(format!("vertex {id} outside 1..={n}")));
        }
        if out[id - 1].is_some() {
            return Err(LabelError::File(format!("duplicate record for vertex {id}")));
        }
        out[id - 1] = BitString::from_bytes(body, len);
    }
    out.into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| LabelError::File(format!("no record for vertex {}", i + 1))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths() {
        assert_eq!(
            [1, 2, 3, 4, 5, 8, 9, 64, 65].map(id_width),
            [0, 1, 2, 2, 3, 3, 4, 6, 7]
        );
    }

    #[test]
    fn four_vertex_example() {
        let v = LabelView {
            s: 2,
            depth: 1,
            anc: vec![(3, 0)],
            ..Default::default()
        };
        let bits = encode_label(&v).unwrap();
        // base block, then zero channels and no payload
        assert_eq!(bits.to_string(), ["11", "000111000", "01", "01", "10", "00", "00", "0"].concat());
        assert_eq!(decode_label(&bits, 2).unwrap(), v);
        assert_eq!(bits.len(), base_block_bits(2, 1) + 2 + 1);
    }

    #[test]
    fn two_vertex_root() {
        let v = LabelView {
            s: 1,
            ..Default::default()
        };
        let bits = encode_label(&v).unwrap();
        assert_eq!(bits.to_string(), ["1", "000111000", "0", "0", "0", "0"].concat());
        assert_eq!(decode_label(&bits, 1).unwrap(), v);
    }

    #[test]
    fn overflow() {
        let v = LabelView {
            s: 2,
            depth: 5,
            ..Default::default()
        };
        assert_eq!(
            encode_label(&v),
            Err(LabelError::Overflow { value: 5, width: 2 })
        );
    }

    #[test]
    fn illegal_inputs() {
        assert_eq!(decode_label(&BitString::new(), 3), Err(LabelError::NoPrefix));
        let bad_delim = BitString::from_text("11 000101000 01 00 00 0");
        assert_eq!(decode_label(&bad_delim, 3), Err(LabelError::BadDelimiter));
        let short = BitString::from_text("11 000111000 01");
        assert_eq!(decode_label(&short, 3), Err(LabelError::Truncated));
        let many = BitString::from_text("11 000111000 01 11 00 00 01 00 10 00 00 0");
        assert_eq!(decode_label(&many, 2), Err(LabelError::TooMany(3)));
        let trailing = BitString::from_text("11 000111000 01 00 00 0 1");
        assert_eq!(decode_label(&trailing, 2), Err(LabelError::Trailing(1)));
    }

    #[test]
    fn channel_round_trip() {
        let tuple = |id, depth| Tuple {
            id,
            depth,
            anc: vec![(1, 0)],
        };
        let v = LabelView {
            s: 3,
            depth: 2,
            anc: vec![(1, 0), (2, 1)],
            channels: vec![ChannelBlock {
                child: 3,
                parent: 1,
                pred: Some(5),
                succ: 2,
                cargo_child: tuple(3, 1),
                cargo_parent: Tuple {
                    id: 1,
                    depth: 0,
                    anc: vec![],
                },
                mc_cargo: Some(vec![0xab, 0x00, 0x17]),
            }],
            evaltree: Some(vec![1, 2, 3]),
        };
        let bits = encode_label(&v).unwrap();
        assert_eq!(decode_label(&bits, 2).unwrap(), v);
        // flip a bit inside the channel block: never a panic
        for i in base_block_bits(3, 2)..bits.len() {
            let mut b = bits.clone();
            b.flip(i);
            let _ = decode_label(&b, 2);
        }
    }

    #[test]
    fn label_file_round_trip() {
        let labels = vec![
            BitString::from_text("1011"),
            BitString::new(),
            BitString::from_text("111111111"),
        ];
        let bytes = write_labels(&labels);
        assert_eq!(&bytes[..8], &[0, 0, 0, 1, 0, 0, 0, 4]);
        assert_eq!(read_labels(&bytes, 3).unwrap(), labels);
        assert!(read_labels(&bytes, 2).is_err());
        assert!(read_labels(&bytes[..bytes.len() - 1], 3).is_err());
    }
}
