use proptest::collection::vec;
use proptest::prelude::*;

use lvcert::label::{
    decode_label, encode_label, read_labels, write_labels, BitReader, BitString, BitWriter,
    ChannelBlock, LabelError, LabelView, Tuple,
};

const OMEGA: usize = 3;

fn ids(s: u32) -> impl Strategy<Value = u32> {
    1..=(1u32 << s)
}

fn depths(s: u32) -> impl Strategy<Value = u32> {
    0..(1u32 << s)
}

fn anc(s: u32) -> impl Strategy<Value = Vec<(u32, u32)>> {
    vec((ids(s), depths(s)), 0..=OMEGA)
}

fn tuple(s: u32) -> impl Strategy<Value = Tuple> {
    (ids(s), depths(s), anc(s)).prop_map(|(id, depth, anc)| Tuple { id, depth, anc })
}

fn channel(s: u32) -> impl Strategy<Value = ChannelBlock> {
    (
        ids(s),
        ids(s),
        proptest::option::of(ids(s)),
        ids(s),
        tuple(s),
        tuple(s),
        proptest::option::of(vec(any::<u8>(), 0..24)),
    )
        .prop_filter("a channel never names its child as parent", |c| c.0 != c.1)
        .prop_map(|(child, parent, pred, succ, cargo_child, cargo_parent, mc_cargo)| {
            ChannelBlock {
                child,
                parent,
                pred,
                succ,
                cargo_child,
                cargo_parent,
                mc_cargo,
            }
        })
}

fn view() -> impl Strategy<Value = LabelView> {
    (2u32..=6).prop_flat_map(|s| {
        (
            depths(s),
            anc(s),
            vec(channel(s), 0..=OMEGA),
            proptest::option::of(vec(any::<u8>(), 0..40)),
        )
            .prop_map(move |(depth, anc, channels, evaltree)| LabelView {
                s,
                depth,
                anc,
                channels,
                evaltree,
            })
    })
}

#[test]
fn empty_label_has_no_prefix() {
    assert_eq!(decode_label(&BitString::new(), 2), Err(LabelError::NoPrefix));
}

#[test]
fn too_many_ancestors_is_rejected() {
    let v = LabelView {
        s: 3,
        depth: 4,
        anc: vec![(1, 0), (2, 1), (3, 2)],
        ..Default::default()
    };
    let bits = encode_label(&v).unwrap();
    assert_eq!(decode_label(&bits, 3).unwrap(), v);
    assert_eq!(decode_label(&bits, 2), Err(LabelError::TooMany(3)));
}

#[test]
fn gamma_codes() {
    let mut w = BitWriter::new();
    for x in [1u64, 2, 3, 4, 5, 1000, u32::MAX as u64] {
        w.gamma(x);
    }
    let bits = w.finish();
    assert_eq!(bits.len(), 1 + 3 + 3 + 5 + 5 + 19 + 63);
    let mut r = BitReader::of(&bits);
    for x in [1u64, 2, 3, 4, 5, 1000, u32::MAX as u64] {
        assert_eq!(r.gamma().unwrap(), x);
    }
    assert!(r.expect_end().is_ok());
}

#[test]
fn writer_rejects_overflow() {
    let mut w = BitWriter::new();
    assert_eq!(
        w.uint(8, 3),
        Err(LabelError::Overflow { value: 8, width: 3 })
    );
    assert!(w.uint(u64::MAX, 64).is_ok());
    assert_eq!(w.len(), 64);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn label_round_trip(v in view()) {
        let bits = encode_label(&v).unwrap();
        prop_assert_eq!(decode_label(&bits, OMEGA).unwrap(), v);
    }

    #[test]
    fn truncated_labels_never_decode(v in view(), cut in 1usize..64) {
        let bits = encode_label(&v).unwrap();
        let keep = bits.len().saturating_sub(cut);
        let short = BitString::from_bits(bits.bits()[..keep].iter().map(|b| *b).collect());
        prop_assert!(decode_label(&short, OMEGA).is_err());
    }

    #[test]
    fn uint_stream_round_trip(fields in vec((any::<u64>(), 0u32..=64), 0..40)) {
        let mut w = BitWriter::new();
        let fields: Vec<(u64, u32)> = fields
            .into_iter()
            .map(|(x, width)| (if width == 64 { x } else { x & ((1u64 << width) - 1) }, width))
            .collect();
        for &(x, width) in &fields {
            w.uint(x, width).unwrap();
        }
        let total: u32 = fields.iter().map(|f| f.1).sum();
        prop_assert_eq!(w.len(), total as usize);
        let bits = w.finish();
        let mut r = BitReader::of(&bits);
        for &(x, width) in &fields {
            prop_assert_eq!(r.uint(width).unwrap(), x);
        }
        prop_assert!(r.expect_end().is_ok());
    }

    #[test]
    fn appending_matches_writing(a in vec(any::<bool>(), 0..70), b in vec(any::<bool>(), 0..70)) {
        let mut direct = BitWriter::new();
        direct.bits(&a);
        direct.bits(&b);
        let mut part = BitWriter::new();
        part.bits(&b);
        let (bytes, len) = part.into_parts();
        let mut joined = BitWriter::new();
        joined.bits(&a);
        joined.append(&bytes, len);
        prop_assert_eq!(joined.finish(), direct.finish());
    }

    #[test]
    fn labels_file_round_trip(labels in vec(vec(any::<bool>(), 0..90), 1..12)) {
        let labels: Vec<BitString> = labels.into_iter().map(BitString::from_bits).collect();
        let data = write_labels(&labels);
        prop_assert_eq!(read_labels(&data, labels.len()).unwrap(), labels.clone());
        if !data.is_empty() {
            prop_assert!(read_labels(&data[..data.len() - 1], labels.len()).is_err());
        }
    }
}
