//! Scenario files: a line-oriented description of charts, metrics, vector fields,
//! morphisms and a list of commands to run against them.
//!
//! The grammar is documented in `docs/scenario-grammar.md`.

pub mod expr;
mod run;

use std::sync::Arc;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::geometry::{BilinearForm, Chart, VectorField};
use crate::grassmann::{GeneratorPool, Parity, Superfunction};
use crate::lie_killing::KillingMode;
use crate::morphism::Morphism;
use crate::superlinalg::{self, Signature, SuperMatrix};

pub use expr::parse_expression;
pub use run::{run_scenario, run_source, Outcome};

/// Names that cannot be used as coordinates since they are section keys.
pub const RESERVED: &[&str] = &["even", "odd", "flesh", "chart", "standard", "parity", "source", "target"];

#[derive(Clone, Debug)]
pub struct MorphismDecl {
    pub phi: Morphism,
    pub source_metric: String,
    pub target_metric: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoetherKind {
    Target,
    Domain,
    Stress,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    ValidateMetric { metric: String },
    OspFrame { metric: String },
    LeviCivita { metric: String },
    LieDerivative { field: String, metric: String },
    CheckKilling { field: String, metric: String, modes: Vec<KillingMode> },
    SolveKilling { metric: String, degree: u32 },
    Tension { morphism: String },
    CheckNoether { kind: NoetherKind, morphism: String, field: String },
    Action { morphism: String },
}

#[derive(Clone, Debug)]
pub struct CommandLine {
    pub line: usize,
    pub text: String,
    pub command: Command,
}

#[derive(Clone, Debug, Default)]
pub struct Scenario {
    pub charts: Vec<(String, Arc<Chart>)>,
    pub metrics: Vec<(String, BilinearForm)>,
    pub fields: Vec<(String, VectorField)>,
    pub morphisms: Vec<(String, MorphismDecl)>,
    pub commands: Vec<CommandLine>,
}

/// Largest accepted degree for `solve-killing`.
pub const MAX_SOLVER_DEGREE: u32 = 4;

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

/// One `key = value` entry with the position of the value text.
#[derive(Clone, Debug)]
struct Entry {
    key: String,
    value: String,
    line: usize,
    key_col: usize,
    value_col: usize,
}

#[derive(Clone, Debug)]
struct Section {
    kind: String,
    name: Option<String>,
    line: usize,
    entries: Vec<Entry>,
    commands: Vec<(usize, usize, String)>,
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// 1-based column of byte offset `off` in `line`.
fn column(line: &str, off: usize) -> usize {
    line[..off].chars().count() + 1
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = content.len() - content.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| perr(line_no, column(content, lead), "unterminated section header"))?;
            let mut words = inner.split_whitespace();
            let kind = words.next().ok_or_else(|| perr(line_no, column(content, lead), "empty section header"))?;
            let name = words.next().map(str::to_string);
            if words.next().is_some() {
                return Err(perr(line_no, column(content, lead), "section header has extra words"));
            }
            if !matches!(kind, "chart" | "metric" | "vectorfield" | "morphism" | "run") {
                return Err(perr(line_no, column(content, lead), format!("unknown section `{kind}`")));
            }
            if let Some(n) = &name {
                if !is_ident(n) {
                    return Err(perr(line_no, column(content, lead), format!("bad name `{n}`")));
                }
            }
            let needs_name = matches!(kind, "metric" | "vectorfield" | "morphism");
            if needs_name && name.is_none() {
                return Err(perr(line_no, column(content, lead), format!("[{kind}] needs a name")));
            }
            if kind == "run" && name.is_some() {
                return Err(perr(line_no, column(content, lead), "[run] takes no name"));
            }
            sections.push(Section { kind: kind.into(), name, line: line_no, entries: vec![], commands: vec![] });
            continue;
        }
        let Some(sec) = sections.last_mut() else {
            return Err(perr(line_no, column(content, lead), "entry outside of any section"));
        };
        if sec.kind == "run" {
            sec.commands.push((line_no, column(content, lead), trimmed.to_string()));
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(perr(line_no, column(content, lead), "expected `key = value`"));
        };
        let key = content[..eq].trim().to_string();
        if key.is_empty() {
            return Err(perr(line_no, column(content, lead), "missing key"));
        }
        let after = &content[eq + 1..];
        let vlead = after.len() - after.trim_start().len();
        sec.entries.push(Entry {
            key,
            value: after.trim().to_string(),
            line: line_no,
            key_col: column(content, lead),
            value_col: column(content, eq + 1 + vlead),
        });
    }
    Ok(sections)
}

fn parse_entry(e: &Entry, pool: &Arc<GeneratorPool>) -> Result<Superfunction> {
    expr::parse_at(&e.value, pool, e.line, e.value_col)
}

fn name_list(e: &Entry) -> Result<Vec<String>> {
    if e.value.is_empty() {
        return Ok(vec![]);
    }
    e.value
        .split(',')
        .map(|s| {
            let s = s.trim();
            if !is_ident(s) {
                return Err(perr(e.line, e.value_col, format!("bad identifier `{s}`")));
            }
            if RESERVED.contains(&s) {
                return Err(perr(e.line, e.value_col, format!("`{s}` is reserved")));
            }
            Ok(s.to_string())
        })
        .collect()
}

fn constant(e: &Entry, text: &str, col: usize) -> Result<BigRational> {
    let pool = GeneratorPool::with_names(&[], &[], &[])?;
    let v = expr::parse_at(text, &pool, e.line, col)?;
    v.constant_value().ok_or_else(|| perr(e.line, col, "bound must be a rational constant"))
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn build_chart(sec: &Section) -> Result<Arc<Chart>> {
    let (mut even, mut odd, mut flesh) = (None, None, None);
    let mut bounds_src: Vec<&Entry> = Vec::new();
    for e in &sec.entries {
        match e.key.as_str() {
            "even" if even.is_none() => even = Some(name_list(e)?),
            "odd" if odd.is_none() => odd = Some(name_list(e)?),
            "flesh" if flesh.is_none() => flesh = Some(name_list(e)?),
            "even" | "odd" | "flesh" => return Err(perr(e.line, e.key_col, format!("duplicate key `{}`", e.key))),
            _ => bounds_src.push(e),
        }
    }
    let (even, odd, flesh) = (even.unwrap_or_default(), odd.unwrap_or_default(), flesh.unwrap_or_default());
    let pool = GeneratorPool::with_names(&refs(&even), &refs(&odd), &refs(&flesh))
        .map_err(|err| perr(sec.line, 1, err.to_string()))?;
    let one = BigRational::from_integer(1.into());
    let mut bounds = vec![(BigRational::from_integer(0.into()), one); even.len()];
    let mut seen = vec![false; even.len()];
    for e in bounds_src {
        let Some(k) = even.iter().position(|n| *n == e.key) else {
            return Err(perr(e.line, e.key_col, format!("unknown chart key `{}`", e.key)));
        };
        if seen[k] {
            return Err(perr(e.line, e.key_col, format!("duplicate bounds for `{}`", e.key)));
        }
        seen[k] = true;
        let inner = e
            .value
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| perr(e.line, e.value_col, "bounds must read `[a, b]`"))?;
        let comma = inner.find(',').ok_or_else(|| perr(e.line, e.value_col, "bounds must read `[a, b]`"))?;
        let a = constant(e, &inner[..comma], e.value_col + 1)?;
        let b = constant(e, &inner[comma + 1..], e.value_col + 1 + inner[..=comma].chars().count())?;
        bounds[k] = (a, b);
    }
    Chart::new(pool, bounds).map_err(|err| perr(sec.line, 1, err.to_string()))
}

fn parse_signature(e: &Entry) -> Result<Signature> {
    let bad = || perr(e.line, e.value_col, "signature must read `(t,s|2m)`");
    let inner = e.value.strip_prefix('(').and_then(|s| s.strip_suffix(')')).ok_or_else(bad)?;
    let (ts, m2) = inner.split_once('|').ok_or_else(bad)?;
    let (t, s) = ts.split_once(',').ok_or_else(bad)?;
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
    let (t, s, m2) = (num(t)?, num(s)?, num(m2)?);
    if m2 % 2 != 0 {
        return Err(perr(e.line, e.value_col, "odd dimension of a signature must be even"));
    }
    Ok(Signature::new(t, s, m2 / 2))
}

impl Scenario {
    fn chart(&self, name: &str) -> Option<&Arc<Chart>> {
        self.charts.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn metric(&self, name: &str) -> Option<&BilinearForm> {
        self.metrics.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn field(&self, name: &str) -> Option<&VectorField> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn morphism(&self, name: &str) -> Option<&MorphismDecl> {
        self.morphisms.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    fn taken(&self, name: &str) -> bool {
        self.metric(name).is_some() || self.field(name).is_some() || self.morphism(name).is_some()
    }

    /// The chart named by a `chart = NAME` entry, or the only chart.
    fn chart_for(&self, sec: &Section) -> Result<Arc<Chart>> {
        if let Some(e) = sec.entries.iter().find(|e| e.key == "chart") {
            return self
                .chart(&e.value)
                .cloned()
                .ok_or_else(|| perr(e.line, e.value_col, format!("unknown chart `{}`", e.value)));
        }
        match self.charts.as_slice() {
            [(_, c)] => Ok(c.clone()),
            [] => Err(perr(sec.line, 1, "no chart declared before this section")),
            _ => Err(perr(sec.line, 1, "several charts are declared; name one with `chart = NAME`")),
        }
    }

    fn build_metric(&self, sec: &Section) -> Result<BilinearForm> {
        let chart = self.chart_for(sec)?;
        let (p, q) = chart.dims();
        let n = chart.dim();
        let pool = chart.pool();
        if let Some(e) = sec.entries.iter().find(|e| e.key == "standard") {
            if let Some(other) = sec.entries.iter().find(|e| e.key != "standard" && e.key != "chart") {
                return Err(perr(other.line, other.key_col, "`standard` metrics take no entries"));
            }
            let sig = parse_signature(e)?;
            if sig.even_dim() != p || sig.odd_dim() != q {
                return Err(perr(e.line, e.value_col, format!("signature {sig} does not fit the chart")));
            }
            return BilinearForm::new(&chart, superlinalg::standard_metric(pool, sig));
        }
        let mut rows: Vec<Vec<Option<Superfunction>>> = vec![vec![None; n]; n];
        for e in &sec.entries {
            if e.key == "chart" {
                continue;
            }
            let bad = || perr(e.line, e.key_col, format!("metric keys read `(a, b)`, got `{}`", e.key));
            let inner = e.key.strip_prefix('(').and_then(|s| s.strip_suffix(')')).ok_or_else(bad)?;
            let (a, b) = inner.split_once(',').ok_or_else(bad)?;
            let idx = |s: &str| {
                chart
                    .coord_index(s.trim())
                    .ok_or_else(|| perr(e.line, e.key_col, format!("unknown coordinate `{}`", s.trim())))
            };
            let (i, j) = (idx(a)?, idx(b)?);
            if rows[i][j].is_some() {
                return Err(perr(e.line, e.key_col, format!("duplicate entry {}", e.key)));
            }
            rows[i][j] = Some(parse_entry(e, pool)?);
        }
        let mut full = vec![vec![chart.zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                full[i][j] = match (&rows[i][j], &rows[j][i]) {
                    (Some(v), _) => v.clone(),
                    (None, Some(v)) => {
                        let flip = chart.coord_parity(i).is_odd() && chart.coord_parity(j).is_odd();
                        v.clone().negate_if(flip)
                    }
                    (None, None) => chart.zero(),
                };
            }
        }
        let m = SuperMatrix::new(p, q, Parity::Even, full)
            .map_err(|_| perr(sec.line, 1, "metric entries must be even in the (even,even) and (odd,odd) blocks and odd elsewhere"))?;
        BilinearForm::new(&chart, m)
    }

    fn build_field(&self, sec: &Section) -> Result<VectorField> {
        let chart = self.chart_for(sec)?;
        let mut parity = None;
        let mut comps: Vec<Option<Superfunction>> = vec![None; chart.dim()];
        for e in &sec.entries {
            match e.key.as_str() {
                "chart" => {}
                "parity" => {
                    parity = Some(match e.value.as_str() {
                        "even" => Parity::Even,
                        "odd" => Parity::Odd,
                        _ => return Err(perr(e.line, e.value_col, "parity is `even` or `odd`")),
                    })
                }
                k => {
                    let i = chart
                        .coord_index(k)
                        .ok_or_else(|| perr(e.line, e.key_col, format!("unknown coordinate `{k}`")))?;
                    if comps[i].is_some() {
                        return Err(perr(e.line, e.key_col, format!("duplicate component `{k}`")));
                    }
                    comps[i] = Some(parse_entry(e, chart.pool())?);
                }
            }
        }
        let comps: Vec<Superfunction> = comps.into_iter().map(|c| c.unwrap_or_else(|| chart.zero())).collect();
        let r = match parity {
            Some(p) => VectorField::new(&chart, p, comps),
            None => VectorField::from_components(&chart, comps),
        };
        r.map_err(|err| perr(sec.line, 1, format!("vector field: {err}")))
    }

    fn build_morphism(&self, sec: &Section) -> Result<MorphismDecl> {
        let lookup = |key: &str| -> Result<(String, &BilinearForm)> {
            let e = sec
                .entries
                .iter()
                .find(|e| e.key == key)
                .ok_or_else(|| perr(sec.line, 1, format!("morphism needs `{key} = METRIC`")))?;
            let m = self
                .metric(&e.value)
                .ok_or_else(|| perr(e.line, e.value_col, format!("unknown metric `{}`", e.value)))?;
            Ok((e.value.clone(), m))
        };
        let (sname, h) = lookup("source")?;
        let (tname, g) = lookup("target")?;
        let (src, tgt) = (h.chart().clone(), g.chart().clone());
        let mut images: Vec<Option<Superfunction>> = vec![None; tgt.dim()];
        for e in &sec.entries {
            if e.key == "source" || e.key == "target" {
                continue;
            }
            let a = tgt
                .coord_index(&e.key)
                .ok_or_else(|| perr(e.line, e.key_col, format!("unknown target coordinate `{}`", e.key)))?;
            if images[a].is_some() {
                return Err(perr(e.line, e.key_col, format!("duplicate pullback for `{}`", e.key)));
            }
            images[a] = Some(parse_entry(e, src.pool())?);
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(a, v)| v.ok_or_else(|| perr(sec.line, 1, format!("missing pullback for `{}`", tgt.coord_name(a)))))
            .collect::<Result<Vec<_>>>()?;
        let phi = Morphism::new(&src, &tgt, images).map_err(|err| perr(sec.line, 1, err.to_string()))?;
        Ok(MorphismDecl { phi, source_metric: sname, target_metric: tname })
    }

    fn parse_command(&self, line: usize, col: usize, text: &str) -> Result<Command> {
        let words: Vec<&str> = text.split_whitespace().collect();
        let err = |m: String| perr(line, col, m);
        let metric = |w: &str| -> Result<String> {
            self.metric(w).map(|_| w.to_string()).ok_or_else(|| err(format!("unknown metric `{w}`")))
        };
        let field = |w: &str| -> Result<String> {
            self.field(w).map(|_| w.to_string()).ok_or_else(|| err(format!("unknown vector field `{w}`")))
        };
        let morphism = |w: &str| -> Result<String> {
            self.morphism(w).map(|_| w.to_string()).ok_or_else(|| err(format!("unknown morphism `{w}`")))
        };
        let same_chart = |f: &str, m: &str| -> Result<()> {
            let (f, m) = (self.field(f).unwrap(), self.metric(m).unwrap());
            if crate::geometry::same_chart(f.chart(), m.chart()) {
                Ok(())
            } else {
                Err(err("vector field and metric live on different charts".into()))
            }
        };
        let cmd = match words.as_slice() {
            ["validate-metric", g] => Command::ValidateMetric { metric: metric(g)? },
            ["osp-frame", g] => Command::OspFrame { metric: metric(g)? },
            ["levi-civita", g] => Command::LeviCivita { metric: metric(g)? },
            ["lie-derivative", x, g] => {
                let (field, metric) = (field(x)?, metric(g)?);
                same_chart(&field, &metric)?;
                Command::LieDerivative { field, metric }
            }
            ["check-killing", x, g, rest @ ..] => {
                let (field, metric) = (field(x)?, metric(g)?);
                same_chart(&field, &metric)?;
                let modes = match rest {
                    [] | ["--mode", "all"] => KillingMode::ALL.to_vec(),
                    ["--mode", "i"] => vec![KillingMode::I],
                    ["--mode", "ii"] => vec![KillingMode::II],
                    ["--mode", "v"] => vec![KillingMode::V],
                    _ => return Err(err("expected `--mode i|ii|v|all`".into())),
                };
                Command::CheckKilling { field, metric, modes }
            }
            ["solve-killing", g, "--degree", d] => {
                let degree: u32 = d.parse().map_err(|_| err(format!("bad degree `{d}`")))?;
                if degree > MAX_SOLVER_DEGREE {
                    return Err(err(format!("degree is limited to {MAX_SOLVER_DEGREE}")));
                }
                Command::SolveKilling { metric: metric(g)?, degree }
            }
            ["tension", p] => Command::Tension { morphism: morphism(p)? },
            ["action", p] => Command::Action { morphism: morphism(p)? },
            ["check-noether", kind, p, x] => {
                let kind = match *kind {
                    "target" => NoetherKind::Target,
                    "domain" => NoetherKind::Domain,
                    "stress" => NoetherKind::Stress,
                    _ => return Err(err("expected `target`, `domain` or `stress`".into())),
                };
                let (morphism, field) = (morphism(p)?, field(x)?);
                let decl = self.morphism(&morphism).unwrap();
                let chart = match kind {
                    NoetherKind::Target => decl.phi.target(),
                    _ => decl.phi.source(),
                };
                if !crate::geometry::same_chart(self.field(&field).unwrap().chart(), chart) {
                    return Err(err(format!("`{field}` must live on the {} chart of `{morphism}`", match kind {
                        NoetherKind::Target => "target",
                        _ => "source",
                    })));
                }
                Command::CheckNoether { kind, morphism, field }
            }
            [] => return Err(err("empty command".into())),
            [name, ..] => return Err(err(format!("unknown or malformed command `{name}`"))),
        };
        Ok(cmd)
    }

    /// Parses and type-checks a scenario. Every error is an [`Error::Parse`].
    pub fn parse(text: &str) -> Result<Scenario> {
        let mut sc = Scenario::default();
        let mut seen_run = false;
        for sec in split_sections(text)? {
            match sec.kind.as_str() {
                "chart" => {
                    let name = sec.name.clone().unwrap_or_else(|| "main".to_string());
                    if sc.chart(&name).is_some() {
                        return Err(perr(sec.line, 1, format!("duplicate chart `{name}`")));
                    }
                    let c = build_chart(&sec)?;
                    sc.charts.push((name, c));
                }
                kind => {
                    let name = sec.name.clone().unwrap_or_default();
                    if kind != "run" && sc.taken(&name) {
                        return Err(perr(sec.line, 1, format!("duplicate name `{name}`")));
                    }
                    match kind {
                        "metric" => {
                            let m = sc.build_metric(&sec)?;
                            sc.metrics.push((name, m));
                        }
                        "vectorfield" => {
                            let f = sc.build_field(&sec)?;
                            sc.fields.push((name, f));
                        }
                        "morphism" => {
                            let m = sc.build_morphism(&sec)?;
                            sc.morphisms.push((name, m));
                        }
                        _ => {
                            if seen_run {
                                return Err(perr(sec.line, 1, "only one [run] section is allowed"));
                            }
                            seen_run = true;
                            for (line, col, text) in &sec.commands {
                                let command = sc.parse_command(*line, *col, text)?;
                                sc.commands.push(CommandLine { line: *line, text: text.clone(), command });
                            }
                        }
                    }
                }
            }
        }
        Ok(sc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLAT: &str = "\
# flat superspace
[chart]
even = x, y
odd = th1, th2
x = [0, 2]

[metric g]
standard = (0,2|2)

[metric h]
(x,x) = 1
(y,y) = 1
(th1,th2) = -1

[vectorfield T]
x = 1

[run]
validate-metric g
check-killing T g --mode all
";

    #[test]
    fn loads_flat_scenario() {
        let sc = Scenario::parse(FLAT).unwrap();
        assert_eq!(sc.charts[0].1.bounds()[0].1, BigRational::from_integer(2.into()));
        assert_eq!(sc.metric("g"), sc.metric("h"));
        assert_eq!(sc.commands.len(), 2);
        assert_eq!(sc.commands[1].command, Command::CheckKilling {
            field: "T".into(),
            metric: "g".into(),
            modes: KillingMode::ALL.to_vec()
        });
    }

    #[test]
    fn errors_point_at_the_source() {
        let bad = FLAT.replace("x = 1", "x = 1 +");
        match Scenario::parse(&bad) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (16, 8)),
            other => panic!("{other:?}"),
        }
        let bad = FLAT.replace("validate-metric g", "validate-metric q");
        assert!(matches!(Scenario::parse(&bad), Err(Error::Parse { line: 19, .. })));
        let bad = FLAT.replace("even = x, y", "even = x, parity");
        assert!(Scenario::parse(&bad).is_err());
        let bad = FLAT.replace("x = 1", "x = th1");
        assert!(Scenario::parse(&bad).is_ok());
        let bad = FLAT.replace("x = 1", "x = th1\ny = 1");
        assert!(matches!(Scenario::parse(&bad), Err(Error::Parse { .. })));
    }
}
