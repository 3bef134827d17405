mod support;

use proptest::prelude::*;
use support::{layout_for, library, small_config};
use tabexec_core::seed::rng_from_seed;
use tabexec_core::sql::SqlError;
use tabexec_core::{analyze, execute, parse, render_sql, generate_table, instantiate};

#[test]
fn canonical_rendering_normalizes_spacing_and_case() {
    let q = parse("SELECT acetum,newburgh FROM my_table WHERE highboy>234 ORDER BY broccoli DESC LIMIT 2").unwrap();
    assert_eq!(render_sql(&q), "select acetum , newburgh from my_table where highboy > 234 order by broccoli desc limit 2");
    assert_eq!(parse(&render_sql(&q)).unwrap(), q);
}

#[test]
fn error_names() {
    let t = support::fixture_table("sparse_table.md");
    let err = |s: &str| match parse(s) {
        Err(e) => e.name(),
        Ok(q) => execute(&q, &t).unwrap_err().name(),
    };
    assert_eq!(err("select boarfish from w where"), "SyntaxError");
    assert_eq!(err("select nope from w"), "ColumnNotFound");
    assert_eq!(err("select a from w join x on a = b"), "UnsupportedFeature");
    assert_eq!(err("select sum ( boarfish ) from w"), "TypeMismatch");
    assert_eq!(err("select ( select boarfish from w ) = 'x'"), "SubqueryNotScalar");
    assert!(matches!(parse("select a from w having count ( a ) > 1"), Err(SqlError::SyntaxError { .. }) | Err(SqlError::UnsupportedFeature(_))));
}

#[test]
fn empty_aggregates() {
    let t = support::fixture_table("fewshot_table.md");
    let run = |s: &str| execute(&parse(s).unwrap(), &t).map(|a| a.display());
    assert_eq!(run("select count ( wear ) from my_table where wear > 5000").unwrap(), "0");
    assert_eq!(run("select sum ( wear ) from my_table where wear > 5000").unwrap(), "0");
    assert_eq!(run("select max ( wear ) from my_table where wear > 5000").unwrap_err().name(), "EmptyAggregateInput");
    assert_eq!(run("select wear / 0 from my_table").unwrap_err().name(), "DivisionByZero");
    assert_eq!(run("select avg ( wear ) from my_table where huggins = 'ytyayrvj'").unwrap(), "124.5");
}

#[test]
fn comparative_answers_are_booleans() {
    let t = support::fixture_table("fewshot_table.md");
    let q = parse("select ( select wear from my_table where puccoon = 171 ) > ( select wear from my_table where puccoon = 213 )").unwrap();
    assert_eq!(execute(&q, &t).unwrap().display(), "0");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn generated_queries_round_trip(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let sets = library();
        let all: Vec<_> = sets.iter().flat_map(|s| s.templates.iter()).collect();
        let t = all[pick.index(all.len())];
        let mut rng = rng_from_seed(seed);
        let table = generate_table(&small_config(6, layout_for(t, 4, &mut rng)), seed).unwrap();
        let q = instantiate(t, &table, &mut rng).unwrap();
        let text = render_sql(&q);
        prop_assert_eq!(parse(&text).unwrap(), q.clone());
        prop_assert_eq!(analyze(&q).sql_length, text.split(' ').count());
        if let Ok(a) = execute(&q, &table) {
            prop_assert_eq!(a.cells.len(), a.num_rows() * q.select.len());
        }
    }
}
