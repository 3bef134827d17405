mod support;

use support::{fixture, fixture_table};
use tabexec_core::render::parse_markdown;
use tabexec_core::seed::rng_from_seed;
use tabexec_core::{generate_table, to_flatten, to_markdown, TableConfig};

#[test]
fn markdown_golden() {
    let golden = fixture("markdown_golden.md");
    let t = fixture_table("markdown_golden.md");
    assert_eq!(t.num_rows(), 15);
    assert_eq!(to_markdown(&t), golden.trim_end_matches('\n'));
}

#[test]
fn flatten_golden() {
    let t = fixture_table("markdown_golden.md");
    assert_eq!(to_flatten(&t), fixture("flatten_golden.txt").trim_end_matches('\n'));
}

#[test]
fn other_printed_tables_reserialize_exactly() {
    for name in ["sparse_table.md", "dense_table.md", "fewshot_table.md", "cot_table.md", "cot_filtered.md"] {
        let text = fixture(name);
        assert_eq!(to_markdown(&fixture_table(name)), text.trim_end_matches('\n'), "{name}");
    }
}

#[test]
fn flatten_has_one_line_per_row_plus_header() {
    for name in ["sparse_table.md", "fewshot_table.md"] {
        let t = fixture_table(name);
        assert_eq!(to_flatten(&t).lines().count(), t.num_rows() + 1);
    }
}

#[test]
fn generated_tables_round_trip_through_markdown() {
    let mut rng = rng_from_seed(11);
    for seed in 0..200u64 {
        let rows = 1 + (seed as usize % 12);
        let cols = 1 + (seed as usize % 7);
        let cfg = TableConfig { type_ratio: [0.4, 0.4, 0.2], ..TableConfig::with_shape(rows, cols) };
        let t = generate_table(&cfg, rand::Rng::gen(&mut rng)).unwrap();
        let back = parse_markdown(&to_markdown(&t)).unwrap();
        assert_eq!(back.headers().collect::<Vec<_>>(), t.headers().collect::<Vec<_>>());
        assert_eq!(back.rows, t.rows, "seed {seed}");
    }
}
