use std::fmt;

use num_rational::Ratio;

/// Where the scored answer starts inside a completion.
pub const EXTRACTION_RULE: &str =
    "text after the last `Answer:` (case-insensitive), else the whole completion";

/// One normalized answer cell. Cells that parse as decimals compare by value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cell {
    Num(Ratio<i128>),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Text(s) => f.write_str(s),
            Cell::Num(r) => {
                let (n, d) = (*r.numer(), *r.denom());
                if d == 1 {
                    return write!(f, "{n}");
                }
                // Denominators come from powers of ten, so this terminates.
                let mut digits = 0u32;
                let mut scale = 1i128;
                while (scale % d) != 0 {
                    scale *= 10;
                    digits += 1;
                }
                let scaled = n * (scale / d);
                let sign = if scaled < 0 { "-" } else { "" };
                let a = scaled.unsigned_abs();
                let p = 10u128.pow(digits);
                write!(f, "{sign}{}.{:0width$}", a / p, a % p, width = digits as usize)
            }
        }
    }
}

/// The answer part of a model completion.
pub fn extract_answer(completion: &str) -> &str {
    const MARKER: &[u8] = b"answer:";
    let bytes = completion.as_bytes();
    (0..=bytes.len().saturating_sub(MARKER.len()))
        .rev()
        .find(|&i| bytes[i..].len() >= MARKER.len() && bytes[i..i + MARKER.len()].eq_ignore_ascii_case(MARKER))
        .map(|i| &completion[i + MARKER.len()..])
        .unwrap_or(completion)
}

fn parse_decimal(s: &str) -> Option<Ratio<i128>> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) || frac.len() > 30 {
        return None;
    }
    let mut n: i128 = 0;
    for b in int.bytes().chain(frac.bytes()) {
        n = n.checked_mul(10)?.checked_add((b - b'0') as i128)?;
    }
    let d = 10i128.checked_pow(frac.len() as u32)?;
    Some(Ratio::new(if neg { -n } else { n }, d))
}

const BRACKETS: [(char, char); 4] = [('[', ']'), ('(', ')'), ('{', '}'), ('`', '`')];
const QUOTES: [(char, char); 2] = [('"', '"'), ('\'', '\'')];

fn strip_pairs<'a>(mut s: &'a str, pairs: &[(char, char)]) -> &'a str {
    loop {
        let t = s.trim();
        match pairs.iter().find_map(|&(l, r)| t.strip_prefix(l).and_then(|x| x.strip_suffix(r))) {
            Some(x) => s = x,
            None => return t,
        }
    }
}

fn is_rule_line(line: &str) -> bool {
    line.contains('-') && line.chars().all(|c| matches!(c, '|' | ':' | '-' | ' '))
}

/// Canonical cell sequence for a prediction or a gold answer.
///
/// Markdown answer tables lose their header row; everything else is split on
/// commas, pipes and newlines.
pub fn normalize(text: &str) -> Vec<Cell> {
    let body = extract_answer(text).trim().to_lowercase();
    let lines: Vec<&str> = body.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let body = match lines.iter().position(|l| l.starts_with('|') && is_rule_line(l)) {
        Some(rule) if rule >= 1 && lines[rule - 1].starts_with('|') => lines[rule + 1..].join("\n"),
        _ => lines.join("\n"),
    };
    let all: Vec<(char, char)> = BRACKETS.iter().chain(&QUOTES).copied().collect();
    strip_pairs(&body, &BRACKETS)
        .split([',', '|', '\n'])
        .map(|c| strip_pairs(c, &all).split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|c| !c.is_empty())
        .map(|c| match parse_decimal(&c) {
            Some(r) => Cell::Num(r),
            None => Cell::Text(c),
        })
        .collect()
}

/// Canonical text of a cell sequence; normalizing it again is a no-op.
pub fn canonical(cells: &[Cell]) -> String {
    cells.iter().map(Cell::to_string).collect::<Vec<_>>().join(" | ")
}

pub fn exact_match(pred: &str, gold: &str) -> bool {
    normalize(pred) == normalize(gold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals() {
        assert_eq!(parse_decimal("146.50"), parse_decimal("146.5"));
        assert_eq!(parse_decimal("-3"), Some(Ratio::from_integer(-3)));
        assert_eq!(parse_decimal("."), None);
        assert_eq!(parse_decimal("1e3"), None);
        assert_eq!(Cell::Num(parse_decimal("-0.250").unwrap()).to_string(), "-0.25");
    }

    #[test]
    fn extraction_takes_the_last_marker() {
        assert_eq!(extract_answer("Answer: 1\nAnswer: 2").trim(), "2");
        assert_eq!(extract_answer("no marker"), "no marker");
        assert_eq!(extract_answer("Ünï ANSWER: x").trim(), "x");
    }
}
