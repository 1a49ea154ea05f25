//! The scoring engine against the reference rule implementation on a
//! 200-sentence corpus. Regenerate with `oracles/sentiment_golden.py`.

use cvdrisk::sentiment::{default_lexicon, score};

const GOLDEN: &str = include_str!("data/sentiment_golden.tsv");

#[test]
fn compound_and_proportions_match_reference() {
    let lex = default_lexicon();
    let mut n = 0;
    for line in GOLDEN.lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols.len(), 5, "{line}");
        let want: Vec<f64> = cols[1..].iter().map(|c| c.parse().unwrap()).collect();
        let got = score(cols[0], lex);
        let fields = [got.compound, got.pos, got.neu, got.neg];
        for (name, (g, w)) in ["compound", "pos", "neu", "neg"]
            .iter()
            .zip(fields.iter().zip(&want))
        {
            assert!((g - w).abs() <= 1e-9, "{:?} {name}: got {g}, want {w}", cols[0]);
        }
        n += 1;
    }
    assert_eq!(n, 200);
}
