//! Text definition files for map sequences.
//!
//! ```toml
//! kind = "periodic"            # or "finite", which also needs `horizon = <n>`
//! maps = [
//!   { breakpoints = [0, "1/4", "3/4", 1], values = ["1/2", 1, 0, "1/2"] },
//! ]
//! ```
//!
//! Numbers may be integers, decimals, or `"p/q"` strings. Serialisation writes the shortest
//! decimal that reparses to the same binary64, so round trips are bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Result};
use crate::systems::{MapSequence, PiecewiseLinearMap};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    kind: Spanned<String>,
    horizon: Option<Spanned<i64>>,
    #[serde(alias = "period_maps")]
    maps: Spanned<Vec<Spanned<RawMap>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    breakpoints: Spanned<Vec<Spanned<RawNumber>>>,
    values: Spanned<Vec<Spanned<RawNumber>>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawNumber {
    Int(i64),
    Float(f64),
    Text(String),
}

struct Lines<'a> {
    text: &'a str,
}

impl Lines<'_> {
    fn line(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())]
            .matches('\n')
            .count()
            + 1
    }

    fn at<T>(&self, s: &Spanned<T>) -> usize {
        self.line(s.span().start)
    }
}

/// Parses "p/q", a decimal, or an integer.
pub fn parse_number(text: &str) -> std::result::Result<f64, String> {
    let t = text.trim();
    let v = if let Some((p, q)) = t.split_once('/') {
        let p: i64 = p
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in `{t}`"))?;
        let q: i64 = q
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in `{t}`"))?;
        if q == 0 {
            return Err(format!("zero denominator in `{t}`"));
        }
        p as f64 / q as f64
    } else {
        t.parse::<f64>()
            .map_err(|_| format!("`{t}` is not a number"))?
    };
    if !v.is_finite() {
        return Err(format!("`{t}` is not finite"));
    }
    Ok(v)
}

fn number(lines: &Lines, n: &Spanned<RawNumber>) -> Result<f64> {
    match n.get_ref() {
        RawNumber::Int(i) => Ok(*i as f64),
        RawNumber::Float(x) => Ok(*x),
        RawNumber::Text(t) => parse_number(t).map_err(|message| Error::Parse {
            line: lines.at(n),
            message,
        }),
    }
}

fn numbers(lines: &Lines, list: &Spanned<Vec<Spanned<RawNumber>>>) -> Result<Vec<f64>> {
    list.get_ref().iter().map(|n| number(lines, n)).collect()
}

/// Parses definition-file text into a map sequence.
pub fn parse_system_str(text: &str) -> Result<MapSequence> {
    let lines = Lines { text };
    let raw: RawFile = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map_or(1, |s| lines.line(s.start)),
        message: e.message().to_string(),
    })?;
    let mut maps = Vec::with_capacity(raw.maps.get_ref().len());
    for (k, m) in raw.maps.get_ref().iter().enumerate() {
        let bps = numbers(&lines, &m.get_ref().breakpoints)?;
        let vals = numbers(&lines, &m.get_ref().values)?;
        let line = lines.at(m);
        validate_map(&bps, &vals, k, line, &lines, m.get_ref())?;
        let map = PiecewiseLinearMap::new(bps, vals).map_err(|e| Error::Validation {
            line,
            message: format!("map {k}: {e}"),
        })?;
        maps.push(map);
    }
    if maps.is_empty() {
        return Err(Error::Validation {
            line: lines.at(&raw.maps),
            message: "`maps` must be nonempty".into(),
        });
    }
    match raw.kind.get_ref().as_str() {
        "periodic" => {
            if let Some(h) = &raw.horizon {
                return Err(Error::Validation {
                    line: lines.at(h),
                    message: "`horizon` only applies to finite sequences".into(),
                });
            }
            MapSequence::periodic(maps)
        }
        "finite" => {
            let h = raw.horizon.as_ref().ok_or_else(|| Error::Validation {
                line: lines.at(&raw.kind),
                message: "finite sequences need `horizon`".into(),
            })?;
            let horizon = usize::try_from(*h.get_ref()).map_err(|_| Error::Validation {
                line: lines.at(h),
                message: "`horizon` must be positive".into(),
            })?;
            MapSequence::finite(maps, horizon).map_err(|e| Error::Validation {
                line: lines.at(h),
                message: e.to_string(),
            })
        }
        other => Err(Error::Validation {
            line: lines.at(&raw.kind),
            message: format!("`kind` must be \"periodic\" or \"finite\", got \"{other}\""),
        }),
    }
}

fn validate_map(
    bps: &[f64],
    vals: &[f64],
    k: usize,
    line: usize,
    lines: &Lines,
    m: &RawMap,
) -> Result<()> {
    let err = |line: usize, msg: String| {
        Err(Error::Validation {
            line,
            message: format!("map {k}: {msg}"),
        })
    };
    if bps.len() != vals.len() {
        return err(
            line,
            format!("{} breakpoints but {} values", bps.len(), vals.len()),
        );
    }
    if bps.len() < 2 {
        return err(line, "at least two breakpoints are required".into());
    }
    let bp_items = m.breakpoints.get_ref();
    if bps[0] != 0.0 {
        return err(
            lines.at(&bp_items[0]),
            format!("breakpoints must start at 0, got {}", bps[0]),
        );
    }
    if *bps.last().unwrap() != 1.0 {
        return err(
            lines.at(bp_items.last().unwrap()),
            format!("breakpoints must end at 1, got {}", bps.last().unwrap()),
        );
    }
    if let Some(i) = bps.windows(2).position(|w| !(w[0] < w[1])) {
        return err(
            lines.at(&bp_items[i + 1]),
            "breakpoints must be strictly increasing".into(),
        );
    }
    if let Some(i) = vals.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return err(
            lines.at(&m.values.get_ref()[i]),
            format!("value {} lies outside [0,1]", vals[i]),
        );
    }
    Ok(())
}

pub fn parse_system_file(path: &Path) -> Result<MapSequence> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_system_str(&text)
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Definition-file text for a sequence.
pub fn serialize_system(f: &MapSequence) -> String {
    let mut out = String::new();
    match f {
        MapSequence::Periodic { .. } => out.push_str("kind = \"periodic\"\n"),
        MapSequence::Finite { horizon, .. } => {
            out.push_str("kind = \"finite\"\n");
            writeln!(out, "horizon = {horizon}").unwrap();
        }
    }
    out.push_str("maps = [\n");
    for m in f.maps() {
        writeln!(
            out,
            "  {{ breakpoints = [{}], values = [{}] }},",
            fmt_list(m.breakpoints()),
            fmt_list(m.values())
        )
        .unwrap();
    }
    out.push_str("]\n");
    out
}

pub fn write_system_file(f: &MapSequence, path: &Path) -> Result<()> {
    std::fs::write(path, serialize_system(f))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GH: &str = r#"kind = "periodic"
maps = [
  { breakpoints = [0, "1/4", "3/4", 1], values = ["1/2", 1, 0, "1/2"] },
  { breakpoints = [0, 0.5, 0.75, 1], values = [0.5, 1, 0, 0.5] },
]
"#;

    #[test]
    fn parses_fractions_exactly() {
        let f = parse_system_str(GH).unwrap();
        assert_eq!(f.period(), Some(2));
        assert_eq!(f.maps()[0].breakpoints(), &[0.0, 0.25, 0.75, 1.0]);
        assert_eq!(f.maps()[0].values(), &[0.5, 1.0, 0.0, 0.5]);
        assert_eq!(parse_number("1/4").unwrap(), 0.25);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("abc").is_err());
    }

    #[test]
    fn bad_start_reports_line() {
        let text =
            "kind = \"periodic\"\nmaps = [\n  { breakpoints = [0.1, 1], values = [0, 1] },\n]\n";
        match parse_system_str(text) {
            Err(Error::Validation { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("start at 0"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let text = "kind = \"periodic\"\nmaps = [\n  { breakpoints = [0, 1], values = [0, 1] \n";
        assert!(matches!(parse_system_str(text), Err(Error::Parse { .. })));
        let text = "kind = \"periodic\"\nextra = 1\nmaps = []\n";
        assert!(matches!(
            parse_system_str(text),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn kind_and_horizon_are_checked() {
        let text = "kind = \"weird\"\nmaps = [{ breakpoints = [0, 1], values = [0, 1] }]\n";
        assert!(matches!(
            parse_system_str(text),
            Err(Error::Validation { line: 1, .. })
        ));
        let text = "kind = \"finite\"\nmaps = [{ breakpoints = [0, 1], values = [0, 1] }]\n";
        assert!(matches!(
            parse_system_str(text),
            Err(Error::Validation { .. })
        ));
        let text =
            "kind = \"finite\"\nhorizon = 1\nmaps = [{ breakpoints = [0, 1], values = [0, 1] }]\n";
        assert_eq!(parse_system_str(text).unwrap().horizon(), Some(1));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let f = parse_system_str(GH).unwrap();
        let again = parse_system_str(&serialize_system(&f)).unwrap();
        assert_eq!(f, again);
        let odd = MapSequence::autonomous(
            PiecewiseLinearMap::new(vec![0.0, 0.1 + 0.2, 1.0], vec![1.0 / 3.0, 0.7, 0.0]).unwrap(),
        );
        assert_eq!(parse_system_str(&serialize_system(&odd)).unwrap(), odd);
    }
}
