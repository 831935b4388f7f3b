//! Sequence functions `h: H(V) -> R+` and the instance-file format.
//!
//! Four model families are provided: explicit tables, position-discounted
//! additive weights, decaying sensor coverage, and the construction on which
//! the plain sequence greedy fails under removal of a single element.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::sequence::{enumerate_sequences, GroundSet, Sequence};

/// Anything that can be evaluated on sequences of its ground set.
///
/// Implementations must be pure: algorithms, checkers and oracles call
/// `eval` from many threads.
pub trait SequenceObjective: Sync {
    fn ground_set(&self) -> &GroundSet;

    fn eval(&self, s: &Sequence) -> Result<f64>;

    /// `h(add | base) = h(base ⊕ add) - h(base)`.
    fn marginal(&self, base: &Sequence, add: &Sequence) -> Result<f64> {
        Ok(self.eval(&base.concat(add))? - self.eval(base)?)
    }

    /// Disjoint classes of elements that can be relabelled among themselves
    /// without changing any value. Every element is in exactly one class.
    fn interchangeable(&self) -> Vec<Vec<usize>> {
        (0..self.ground_set().len()).map(|e| vec![e]).collect()
    }
}

/// Explicit value table over every sequence up to `max_len`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tabular {
    max_len: usize,
    table: HashMap<Sequence, f64>,
}

impl Tabular {
    /// Validates completeness, nonnegativity and `h(()) = 0`. A missing
    /// `()` entry is taken as 0.
    pub fn new(gs: &GroundSet, max_len: usize, mut table: HashMap<Sequence, f64>) -> Result<Self> {
        if max_len > gs.len() {
            return Err(Error::InvalidInput(format!(
                "maxlen {max_len} exceeds ground set size {}",
                gs.len()
            )));
        }
        let empty = *table.entry(Sequence::empty()).or_insert(0.0);
        if empty != 0.0 {
            return Err(Error::InvalidInput(format!("h(()) must be 0, got {empty}")));
        }
        for (s, &v) in &table {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!("negative or non-finite value {v} for {}", gs.format(s))));
            }
            if s.len() > max_len || s.items().iter().any(|&e| e >= gs.len()) {
                return Err(Error::InvalidInput(format!("entry {} outside the table domain", gs.format(s))));
            }
        }
        for s in enumerate_sequences(gs, max_len)? {
            if !table.contains_key(&s) {
                return Err(Error::IncompleteTable(gs.format(&s)));
            }
        }
        Ok(Tabular { max_len, table })
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn get(&self, s: &Sequence) -> Option<f64> {
        self.table.get(s).copied()
    }
}

/// `h(S) = Σ_i w(v_i)·d(i)` with a nonincreasing position discount.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscountedAdditive {
    weights: Vec<f64>,
    discounts: Vec<f64>,
}

impl DiscountedAdditive {
    pub fn new(weights: Vec<f64>, discounts: Vec<f64>) -> Result<Self> {
        if weights.len() != discounts.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights but {} discounts",
                weights.len(),
                discounts.len()
            )));
        }
        if weights.iter().chain(&discounts).any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidParameter("weights and discounts must be nonnegative".into()));
        }
        if discounts.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter("discounts must be nonincreasing".into()));
        }
        Ok(DiscountedAdditive { weights, discounts })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn discounts(&self) -> &[f64] {
        &self.discounts
    }

    fn eval(&self, s: &Sequence) -> f64 {
        s.items()
            .iter()
            .zip(&self.discounts)
            .map(|(&e, d)| self.weights[e] * d)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sensor {
    /// Coverage strength `C > 0`.
    pub strength: f64,
    /// Lifetime `T > 0`.
    pub lifetime: f64,
    /// Indices into the cell list.
    pub covers: Vec<usize>,
}

/// Sensors activated in sequence; the sensor at position `i` (1-based)
/// detects with probability `min(1, C·e^{-(i-1)/T})` in each cell it covers,
/// and a cell's value is its importance times the probability that at least
/// one activated sensor detects there.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionDecay {
    cells: Vec<(String, f64)>,
    sensors: Vec<Sensor>,
}

impl DetectionDecay {
    pub fn new(cells: Vec<(String, f64)>, sensors: Vec<Sensor>) -> Result<Self> {
        if cells.iter().any(|(_, w)| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter("cell importance must be nonnegative".into()));
        }
        for s in &sensors {
            if !(s.strength > 0.0 && s.strength.is_finite() && s.lifetime > 0.0 && s.lifetime.is_finite()) {
                return Err(Error::InvalidParameter("sensor C and T must be positive".into()));
            }
            if let Some(&c) = s.covers.iter().find(|&&c| c >= cells.len()) {
                return Err(Error::InvalidParameter(format!("sensor covers unknown cell #{c}")));
            }
        }
        Ok(DetectionDecay { cells, sensors })
    }

    pub fn cells(&self) -> &[(String, f64)] {
        &self.cells
    }

    pub fn sensors(&self) -> &[Sensor] {
        &self.sensors
    }

    fn eval(&self, s: &Sequence) -> f64 {
        let mut miss = vec![1.0f64; self.cells.len()];
        for (pos, &e) in s.items().iter().enumerate() {
            let sensor = &self.sensors[e];
            let p = (sensor.strength * (-(pos as f64) / sensor.lifetime).exp()).min(1.0);
            for &c in &sensor.covers {
                miss[c] *= 1.0 - p;
            }
        }
        self.cells.iter().zip(&miss).map(|((_, w), m)| w * (1.0 - m)).sum()
    }
}

/// Ground set `{v} ∪ {u_1..u_n} ∪ {w_1..w_n}` with
/// `h(S) = [v∈S] + (#u's before v, or all u's if v∉S)/n + ε·#w's`.
///
/// Element indices: `v = 0`, `u_i = i`, `w_i = n + i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsgAdversarial {
    n: usize,
    epsilon: f64,
}

impl SsgAdversarial {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn v(&self) -> usize {
        0
    }

    pub fn u(&self, i: usize) -> usize {
        i
    }

    pub fn w(&self, i: usize) -> usize {
        self.n + i
    }

    fn ground_set(&self) -> GroundSet {
        let names = std::iter::once("v".to_string())
            .chain((1..=self.n).map(|i| format!("u{i}")))
            .chain((1..=self.n).map(|i| format!("w{i}")));
        GroundSet::new(names).expect("valid adversarial ground set")
    }

    fn eval(&self, s: &Sequence) -> f64 {
        let mut has_v = 0.0;
        let mut us = 0usize;
        let mut ws = 0usize;
        for &e in s.items() {
            if e == 0 {
                has_v = 1.0;
            } else if e <= self.n {
                if has_v == 0.0 {
                    us += 1;
                }
            } else {
                ws += 1;
            }
        }
        has_v + us as f64 / self.n as f64 + self.epsilon * ws as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Body {
    Tabular(Tabular),
    DiscountedAdditive(DiscountedAdditive),
    DetectionDecay(DetectionDecay),
    SsgAdversarial(SsgAdversarial),
}

/// A sequence function over a ground set.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceFunction {
    ground_set: GroundSet,
    body: Body,
}

impl SequenceFunction {
    pub fn tabular(gs: GroundSet, max_len: usize, table: HashMap<Sequence, f64>) -> Result<Self> {
        let body = Tabular::new(&gs, max_len, table)?;
        Ok(SequenceFunction {
            ground_set: gs,
            body: Body::Tabular(body),
        })
    }

    pub fn discounted_additive(gs: GroundSet, weights: Vec<f64>, discounts: Vec<f64>) -> Result<Self> {
        if weights.len() != gs.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} elements",
                weights.len(),
                gs.len()
            )));
        }
        Ok(SequenceFunction {
            ground_set: gs,
            body: Body::DiscountedAdditive(DiscountedAdditive::new(weights, discounts)?),
        })
    }

    pub fn detection_decay(gs: GroundSet, cells: Vec<(String, f64)>, sensors: Vec<Sensor>) -> Result<Self> {
        if sensors.len() != gs.len() {
            return Err(Error::InvalidParameter(format!(
                "{} sensors for {} elements",
                sensors.len(),
                gs.len()
            )));
        }
        Ok(SequenceFunction {
            ground_set: gs,
            body: Body::DetectionDecay(DetectionDecay::new(cells, sensors)?),
        })
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn kind(&self) -> &'static str {
        match self.body {
            Body::Tabular(_) => "tabular",
            Body::DiscountedAdditive(_) => "discounted_additive",
            Body::DetectionDecay(_) => "detection_decay",
            Body::SsgAdversarial(_) => "ssg_adversarial",
        }
    }

    /// Shorthand for building a sequence from element names.
    pub fn seq<S: AsRef<str>>(&self, names: &[S]) -> Result<Sequence> {
        self.ground_set.sequence(names)
    }
}

/// The construction where the plain greedy concentrates all value
/// in one removable element.
pub fn make_ssg_adversarial(n: usize, epsilon: f64) -> Result<SequenceFunction> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if 2 * n + 1 > crate::sequence::MAX_GROUND_SET {
        return Err(Error::InvalidParameter(format!("n = {n} needs more than 64 elements")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0 / n as f64) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1/n) = (0, {}), got {epsilon}",
            1.0 / n as f64
        )));
    }
    let body = SsgAdversarial { n, epsilon };
    Ok(SequenceFunction {
        ground_set: body.ground_set(),
        body: Body::SsgAdversarial(body),
    })
}

impl SequenceObjective for SequenceFunction {
    fn ground_set(&self) -> &GroundSet {
        &self.ground_set
    }

    fn eval(&self, s: &Sequence) -> Result<f64> {
        match &self.body {
            Body::Tabular(t) => t.get(s).ok_or_else(|| Error::IncompleteTable(self.ground_set.format(s))),
            Body::DiscountedAdditive(d) => Ok(d.eval(s)),
            Body::DetectionDecay(d) => Ok(d.eval(s)),
            Body::SsgAdversarial(a) => Ok(a.eval(s)),
        }
    }

    fn interchangeable(&self) -> Vec<Vec<usize>> {
        let v = self.ground_set.len();
        match &self.body {
            Body::Tabular(_) => (0..v).map(|e| vec![e]).collect(),
            Body::DiscountedAdditive(d) => group_by_key(v, |e| d.weights[e].to_bits()),
            Body::DetectionDecay(d) => group_by_key(v, |e| {
                let s = &d.sensors[e];
                let mut covers = s.covers.clone();
                covers.sort_unstable();
                covers.dedup();
                (s.strength.to_bits(), s.lifetime.to_bits(), covers)
            }),
            Body::SsgAdversarial(a) => vec![
                vec![0],
                (1..=a.n).collect(),
                (a.n + 1..=2 * a.n).collect(),
            ],
        }
    }
}

fn group_by_key<K: PartialEq>(v: usize, key: impl Fn(usize) -> K) -> Vec<Vec<usize>> {
    let mut groups: Vec<(K, Vec<usize>)> = Vec::new();
    for e in 0..v {
        let k = key(e);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, members)) => members.push(e),
            None => groups.push((k, vec![e])),
        }
    }
    groups.into_iter().map(|(_, m)| m).collect()
}

/// The three-element table on which element-level diminishing returns hold
/// but sequence-level diminishing returns fail.
pub fn table3() -> SequenceFunction {
    const ROWS: [(&[&str], f64); 16] = [
        (&[], 0.0),
        (&["v1"], 0.2),
        (&["v2"], 1.2),
        (&["v3"], 1.0),
        (&["v1", "v2"], 1.2),
        (&["v2", "v1"], 1.2),
        (&["v1", "v3"], 1.2),
        (&["v3", "v1"], 1.2),
        (&["v2", "v3"], 1.2),
        (&["v3", "v2"], 2.0),
        (&["v1", "v2", "v3"], 2.2),
        (&["v1", "v3", "v2"], 2.2),
        (&["v2", "v1", "v3"], 1.2),
        (&["v2", "v3", "v1"], 1.2),
        (&["v3", "v1", "v2"], 2.2),
        (&["v3", "v2", "v1"], 2.2),
    ];
    let gs = GroundSet::numbered(3).expect("valid ground set");
    let table = ROWS
        .iter()
        .map(|(names, v)| (gs.sequence(names).expect("valid sequence"), *v))
        .collect();
    SequenceFunction::tabular(gs, 3, table).expect("table is complete")
}

/// Resolves `builtin:table3` and `builtin:adversarial?n=<n>&eps=<eps>`
/// (defaults `n = 10`, `eps = 0.001`).
pub fn builtin(uri: &str) -> Result<SequenceFunction> {
    let rest = uri
        .strip_prefix("builtin:")
        .ok_or_else(|| Error::InvalidInput(format!("not a builtin instance: {uri}")))?;
    let (name, query) = rest.split_once('?').unwrap_or((rest, ""));
    match name {
        "table3" if query.is_empty() => Ok(table3()),
        "adversarial" => {
            let mut n = 10usize;
            let mut eps = 1e-3;
            for pair in query.split('&').filter(|p| !p.is_empty()) {
                let (k, v) = pair
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidInput(format!("malformed query parameter {pair:?}")))?;
                match k {
                    "n" => n = v.parse().map_err(|_| Error::InvalidInput(format!("bad n {v:?}")))?,
                    "eps" | "epsilon" => {
                        eps = v.parse().map_err(|_| Error::InvalidInput(format!("bad eps {v:?}")))?
                    }
                    _ => return Err(Error::InvalidInput(format!("unknown parameter {k:?}"))),
                }
            }
            make_ssg_adversarial(n, eps)
        }
        _ => Err(Error::InvalidInput(format!("unknown builtin instance {uri:?}"))),
    }
}

/// Parses the line-oriented instance format.
pub fn load_instance(text: &str) -> Result<SequenceFunction> {
    Parser::default().parse(text)
}

#[derive(Default)]
struct Parser {
    ground_set: Option<(usize, GroundSet)>,
    kind: Option<(usize, String)>,
    max_len: Option<usize>,
    seqs: Vec<(usize, Vec<String>, f64)>,
    weights: Vec<(usize, String, f64)>,
    discounts: Option<Vec<f64>>,
    n: Option<usize>,
    epsilon: Option<f64>,
    cells: Vec<(String, f64)>,
    sensors: Vec<(usize, String, Sensor)>,
}

fn parse_f64(line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a number, found {tok:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite number {tok:?}")));
    }
    Ok(v)
}

impl Parser {
    fn parse(mut self, text: &str) -> Result<SequenceFunction> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (keyword, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
            let rest = rest.trim();
            self.directive(line, keyword, rest)?;
        }
        self.finish()
    }

    fn directive(&mut self, line: usize, keyword: &str, rest: &str) -> Result<()> {
        let toks: Vec<&str> = rest.split_whitespace().collect();
        match keyword {
            "groundset" => {
                if self.ground_set.is_some() {
                    return Err(Error::parse(line, "groundset declared twice"));
                }
                let gs = GroundSet::new(toks.iter().copied()).map_err(|e| Error::parse(line, e.to_string()))?;
                self.ground_set = Some((line, gs));
            }
            "kind" => {
                if toks.len() != 1 {
                    return Err(Error::parse(line, "expected `kind <name>`"));
                }
                self.kind = Some((line, toks[0].to_string()));
            }
            "maxlen" => {
                let v = toks
                    .first()
                    .and_then(|t| t.parse().ok())
                    .filter(|_| toks.len() == 1)
                    .ok_or_else(|| Error::parse(line, "expected `maxlen <count>`"))?;
                self.max_len = Some(v);
            }
            "seq" => {
                let (names, value) = rest
                    .rsplit_once(':')
                    .ok_or_else(|| Error::parse(line, "expected `seq <elements> : <value>`"))?;
                let value = parse_f64(line, value.trim())?;
                if value < 0.0 {
                    return Err(Error::parse(line, format!("negative value {value}")));
                }
                let names = names.split_whitespace().map(str::to_string).collect();
                self.seqs.push((line, names, value));
            }
            "weight" => {
                if toks.len() != 2 {
                    return Err(Error::parse(line, "expected `weight <element> <value>`"));
                }
                let w = parse_f64(line, toks[1])?;
                if w < 0.0 {
                    return Err(Error::parse(line, format!("negative weight {w}")));
                }
                self.weights.push((line, toks[0].to_string(), w));
            }
            "discount" => {
                let ds = toks.iter().map(|t| parse_f64(line, t)).collect::<Result<Vec<_>>>()?;
                self.discounts = Some(ds);
            }
            "n" => {
                let v = toks
                    .first()
                    .and_then(|t| t.parse().ok())
                    .filter(|_| toks.len() == 1)
                    .ok_or_else(|| Error::parse(line, "expected `n <count>`"))?;
                self.n = Some(v);
            }
            "epsilon" => {
                if toks.len() != 1 {
                    return Err(Error::parse(line, "expected `epsilon <value>`"));
                }
                self.epsilon = Some(parse_f64(line, toks[0])?);
            }
            "cell" => {
                if toks.len() != 2 {
                    return Err(Error::parse(line, "expected `cell <name> <importance>`"));
                }
                let w = parse_f64(line, toks[1])?;
                if w < 0.0 {
                    return Err(Error::parse(line, format!("negative importance {w}")));
                }
                if self.cells.iter().any(|(n, _)| n == toks[0]) {
                    return Err(Error::parse(line, format!("duplicate cell {:?}", toks[0])));
                }
                self.cells.push((toks[0].to_string(), w));
            }
            "sensor" => {
                let (elem, attrs) = toks
                    .split_first()
                    .ok_or_else(|| Error::parse(line, "expected `sensor <element> C=<v> T=<v> covers=<cells>`"))?;
                let mut strength = None;
                let mut lifetime = None;
                let mut covers = None;
                for a in attrs {
                    let (k, v) = a
                        .split_once('=')
                        .ok_or_else(|| Error::parse(line, format!("malformed sensor attribute {a:?}")))?;
                    match k {
                        "C" => strength = Some(parse_f64(line, v)?),
                        "T" => lifetime = Some(parse_f64(line, v)?),
                        "covers" => {
                            let idx = v
                                .split(',')
                                .filter(|c| !c.is_empty())
                                .map(|c| {
                                    self.cells
                                        .iter()
                                        .position(|(n, _)| n == c)
                                        .ok_or_else(|| Error::parse(line, format!("unknown cell {c:?}")))
                                })
                                .collect::<Result<Vec<_>>>()?;
                            covers = Some(idx);
                        }
                        _ => return Err(Error::parse(line, format!("unknown sensor attribute {k:?}"))),
                    }
                }
                let sensor = Sensor {
                    strength: strength.ok_or_else(|| Error::parse(line, "sensor is missing C="))?,
                    lifetime: lifetime.ok_or_else(|| Error::parse(line, "sensor is missing T="))?,
                    covers: covers.unwrap_or_default(),
                };
                self.sensors.push((line, elem.to_string(), sensor));
            }
            other => return Err(Error::parse(line, format!("unknown directive {other:?}"))),
        }
        Ok(())
    }

    fn require_ground_set(&self) -> Result<&GroundSet> {
        self.ground_set
            .as_ref()
            .map(|(_, gs)| gs)
            .ok_or_else(|| Error::InvalidInput("missing `groundset` declaration".into()))
    }

    fn finish(self) -> Result<SequenceFunction> {
        let (kind_line, kind) = self
            .kind
            .clone()
            .ok_or_else(|| Error::InvalidInput("missing `kind` declaration".into()))?;
        match kind.as_str() {
            "tabular" => {
                let gs = self.require_ground_set()?.clone();
                let max_len = self.max_len.unwrap_or(gs.len());
                let mut table = HashMap::new();
                for (line, names, value) in &self.seqs {
                    let s = gs.sequence(names).map_err(|e| Error::parse(*line, e.to_string()))?;
                    if s.len() > max_len {
                        return Err(Error::parse(*line, format!("sequence longer than maxlen {max_len}")));
                    }
                    if table.insert(s, *value).is_some() {
                        return Err(Error::parse(*line, format!("duplicate entry for ({})", names.join(" "))));
                    }
                }
                SequenceFunction::tabular(gs, max_len, table)
            }
            "discounted_additive" => {
                let gs = self.require_ground_set()?.clone();
                let mut weights = vec![None; gs.len()];
                for (line, name, w) in &self.weights {
                    let e = gs
                        .index_of(name)
                        .ok_or_else(|| Error::parse(*line, format!("unknown element {name:?}")))?;
                    if weights[e].replace(*w).is_some() {
                        return Err(Error::parse(*line, format!("duplicate weight for {name:?}")));
                    }
                }
                let weights = weights
                    .into_iter()
                    .enumerate()
                    .map(|(e, w)| w.ok_or_else(|| Error::InvalidInput(format!("missing weight for {}", gs.name(e)))))
                    .collect::<Result<Vec<_>>>()?;
                let discounts = self
                    .discounts
                    .clone()
                    .ok_or_else(|| Error::InvalidInput("missing `discount` line".into()))?;
                SequenceFunction::discounted_additive(gs, weights, discounts)
            }
            "ssg_adversarial" => {
                let n = self.n.ok_or_else(|| Error::InvalidInput("missing `n` line".into()))?;
                let eps = self
                    .epsilon
                    .ok_or_else(|| Error::InvalidInput("missing `epsilon` line".into()))?;
                let f = make_ssg_adversarial(n, eps)?;
                if let Some((line, gs)) = &self.ground_set {
                    if gs != f.ground_set() {
                        return Err(Error::parse(*line, "groundset does not match v, u1..un, w1..wn"));
                    }
                }
                Ok(f)
            }
            "detection_decay" => {
                let gs = self.require_ground_set()?.clone();
                let mut sensors = vec![None; gs.len()];
                for (line, name, sensor) in &self.sensors {
                    let e = gs
                        .index_of(name)
                        .ok_or_else(|| Error::parse(*line, format!("unknown element {name:?}")))?;
                    if sensors[e].replace(sensor.clone()).is_some() {
                        return Err(Error::parse(*line, format!("duplicate sensor for {name:?}")));
                    }
                }
                let sensors = sensors
                    .into_iter()
                    .enumerate()
                    .map(|(e, s)| s.ok_or_else(|| Error::InvalidInput(format!("missing sensor for {}", gs.name(e)))))
                    .collect::<Result<Vec<_>>>()?;
                SequenceFunction::detection_decay(gs, self.cells.clone(), sensors)
            }
            other => Err(Error::parse(kind_line, format!("unknown kind {other:?}"))),
        }
    }
}

/// Serializes a function; tables are written out in enumeration order,
/// parametric families by their parameters. Numbers use the shortest
/// representation that parses back to the same `f64`.
pub fn save_instance(f: &SequenceFunction) -> String {
    let gs = f.ground_set();
    let mut out = String::new();
    let _ = writeln!(out, "groundset {}", gs.names().join(" "));
    let _ = writeln!(out, "kind {}", f.kind());
    match f.body() {
        Body::Tabular(t) => {
            let _ = writeln!(out, "maxlen {}", t.max_len());
            for s in enumerate_sequences(gs, t.max_len()).expect("max_len within ground set") {
                let names: Vec<&str> = s.items().iter().map(|&e| gs.name(e)).collect();
                let value = t.get(&s).expect("complete table");
                if names.is_empty() {
                    let _ = writeln!(out, "seq : {value}");
                } else {
                    let _ = writeln!(out, "seq {} : {value}", names.join(" "));
                }
            }
        }
        Body::DiscountedAdditive(d) => {
            for (e, w) in d.weights().iter().enumerate() {
                let _ = writeln!(out, "weight {} {w}", gs.name(e));
            }
            let ds: Vec<String> = d.discounts().iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "discount {}", ds.join(" "));
        }
        Body::DetectionDecay(d) => {
            for (name, w) in d.cells() {
                let _ = writeln!(out, "cell {name} {w}");
            }
            for (e, s) in d.sensors().iter().enumerate() {
                let covers: Vec<&str> = s.covers.iter().map(|&c| d.cells()[c].0.as_str()).collect();
                let _ = writeln!(
                    out,
                    "sensor {} C={} T={} covers={}",
                    gs.name(e),
                    s.strength,
                    s.lifetime,
                    covers.join(",")
                );
            }
        }
        Body::SsgAdversarial(a) => {
            let _ = writeln!(out, "n {}", a.n());
            let _ = writeln!(out, "epsilon {}", a.epsilon());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn table3_values() {
        let f = table3();
        assert_eq!(f.eval(&f.seq(&["v3", "v2"]).unwrap()).unwrap(), 2.0);
        assert_eq!(f.eval(&f.seq(&["v1", "v2", "v3"]).unwrap()).unwrap(), 2.2);
    }

    #[test]
    fn table3_marginals() {
        let f = table3();
        let v23 = f.seq(&["v2", "v3"]).unwrap();
        let m0 = f.marginal(&Sequence::empty(), &v23).unwrap();
        let m1 = f.marginal(&f.seq(&["v1"]).unwrap(), &v23).unwrap();
        assert!((m0 - 1.2).abs() < TOL);
        assert!((m1 - 2.0).abs() < TOL);
        let any = f.seq(&["v3", "v1"]).unwrap();
        assert_eq!(f.marginal(&any, &Sequence::empty()).unwrap(), 0.0);
    }

    #[test]
    fn table3_marginal_columns() {
        // (sequence, h((v1)|S), h((v2)|S), h((v3)|S)) as printed with the table.
        let cols: [(&[&str], [f64; 3]); 16] = [
            (&[], [0.2, 1.2, 1.0]),
            (&["v1"], [0.0, 1.0, 1.0]),
            (&["v2"], [0.0, 0.0, 0.0]),
            (&["v3"], [0.2, 1.0, 0.0]),
            (&["v1", "v2"], [0.0, 0.0, 1.0]),
            (&["v2", "v1"], [0.0, 0.0, 0.0]),
            (&["v1", "v3"], [0.0, 1.0, 0.0]),
            (&["v3", "v1"], [0.0, 1.0, 0.0]),
            (&["v2", "v3"], [0.0, 0.0, 0.0]),
            (&["v3", "v2"], [0.2, 0.0, 0.0]),
            (&["v1", "v2", "v3"], [0.0; 3]),
            (&["v1", "v3", "v2"], [0.0; 3]),
            (&["v2", "v1", "v3"], [0.0; 3]),
            (&["v2", "v3", "v1"], [0.0; 3]),
            (&["v3", "v1", "v2"], [0.0; 3]),
            (&["v3", "v2", "v1"], [0.0; 3]),
        ];
        let f = table3();
        let mut checks = 0;
        for (names, expected) in cols {
            let s = f.seq(names).unwrap();
            for (e, want) in expected.iter().enumerate() {
                let got = f.marginal(&s, &Sequence::from_indices(&[e]).unwrap()).unwrap();
                assert!((got - want).abs() < 1e-9, "{names:?} + v{}: {got} vs {want}", e + 1);
                checks += 1;
            }
        }
        assert_eq!(checks, 48);
    }

    #[test]
    fn adversarial_values() {
        let f = make_ssg_adversarial(10, 1e-3).unwrap();
        let Body::SsgAdversarial(a) = *f.body() else { unreachable!() };
        let single = |e| f.eval(&Sequence::from_indices(&[e]).unwrap()).unwrap();
        assert_eq!(single(a.v()), 1.0);
        assert!((single(a.u(1)) - 0.1).abs() < TOL);
        assert!((single(a.w(1)) - 0.001).abs() < TOL);

        let mut items = vec![a.v()];
        items.extend((1..=9).map(|i| a.w(i)));
        let s = Sequence::from_indices(&items).unwrap();
        assert!((f.eval(&s).unwrap() - 1.009).abs() < TOL);

        let all_u: Vec<usize> = (1..=10).map(|i| a.u(i)).collect();
        assert!((f.eval(&Sequence::from_indices(&all_u).unwrap()).unwrap() - 1.0).abs() < TOL);
        for drop in 0..10 {
            let mut rest = all_u.clone();
            rest.remove(drop);
            assert!((f.eval(&Sequence::from_indices(&rest).unwrap()).unwrap() - 0.9).abs() < TOL);
        }
    }

    #[test]
    fn adversarial_order_matters() {
        let f = make_ssg_adversarial(3, 0.01).unwrap();
        assert!((f.eval(&f.seq(&["v", "u1"]).unwrap()).unwrap() - 1.0).abs() < TOL);
        assert!((f.eval(&f.seq(&["u1", "v"]).unwrap()).unwrap() - 4.0 / 3.0).abs() < TOL);
    }

    #[test]
    fn adversarial_parameter_checks() {
        assert!(matches!(make_ssg_adversarial(10, 0.1), Err(Error::InvalidParameter(_))));
        assert!(matches!(make_ssg_adversarial(10, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(make_ssg_adversarial(0, 0.01), Err(Error::InvalidParameter(_))));
        assert!(make_ssg_adversarial(10, 0.099).is_ok());
    }

    #[test]
    fn discounted_additive_eval() {
        let gs = GroundSet::numbered(3).unwrap();
        let f = SequenceFunction::discounted_additive(gs, vec![1.0, 2.0, 4.0], vec![1.0, 0.5, 0.25]).unwrap();
        let s = f.seq(&["v3", "v1", "v2"]).unwrap();
        assert!((f.eval(&s).unwrap() - (4.0 + 0.5 + 0.5)).abs() < TOL);
        let gs = GroundSet::numbered(2).unwrap();
        assert!(SequenceFunction::discounted_additive(gs, vec![1.0, 1.0], vec![0.5, 1.0]).is_err());
    }

    #[test]
    fn detection_decay_eval() {
        let gs = GroundSet::numbered(2).unwrap();
        let cells = vec![("a".to_string(), 1.0), ("b".to_string(), 2.0)];
        let sensors = vec![
            Sensor { strength: 0.5, lifetime: 1.0, covers: vec![0, 1] },
            Sensor { strength: 2.0, lifetime: 2.0, covers: vec![1] },
        ];
        let f = SequenceFunction::detection_decay(gs, cells, sensors).unwrap();
        // (v2, v1): v2 at position 1 saturates cell b; v1 at position 2 detects with 0.5/e.
        let p = 0.5 * (-1.0f64).exp();
        let want = 1.0 * p + 2.0 * 1.0;
        assert!((f.eval(&f.seq(&["v2", "v1"]).unwrap()).unwrap() - want).abs() < TOL);
        assert_eq!(f.eval(&Sequence::empty()).unwrap(), 0.0);
    }

    const TABLE3_TEXT: &str = "\
# element-sequence-submodular but not sequence-submodular
groundset v1 v2 v3
kind tabular
maxlen 3
seq : 0
seq v1 : 0.2
seq v2 : 1.2
seq v3 : 1
seq v1 v2 : 1.2
seq v2 v1 : 1.2
seq v1 v3 : 1.2
seq v3 v1 : 1.2
seq v2 v3 : 1.2
seq v3 v2 : 2.0
seq v1 v2 v3 : 2.2
seq v1 v3 v2 : 2.2
seq v2 v1 v3 : 1.2
seq v2 v3 v1 : 1.2
seq v3 v1 v2 : 2.2
seq v3 v2 v1 : 2.2
";

    #[test]
    fn load_table3_text() {
        let f = load_instance(TABLE3_TEXT).unwrap();
        assert_eq!(f, table3());
    }

    #[test]
    fn load_rejects_negative_value() {
        let text = TABLE3_TEXT.replace("seq v1 : 0.2", "seq v1 : -0.1");
        match load_instance(&text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 6);
                assert!(message.contains("negative"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_rejects_incomplete_table() {
        let text = TABLE3_TEXT.replace("seq v1 v3 : 1.2\n", "");
        assert!(matches!(load_instance(&text), Err(Error::IncompleteTable(_))));
    }

    #[test]
    fn load_rejects_duplicates_and_missing_ground_set() {
        let text = format!("{TABLE3_TEXT}seq v3 v2 : 2.0\n");
        assert!(matches!(load_instance(&text), Err(Error::Parse { line: 21, .. })));
        let text = TABLE3_TEXT.replace("groundset v1 v2 v3\n", "");
        assert!(matches!(load_instance(&text), Err(Error::InvalidInput(_))));
        assert!(matches!(load_instance("groundset a\nkind tabular\nbogus 1\n"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn save_table3_has_sixteen_value_lines() {
        let text = save_instance(&table3());
        assert_eq!(text.lines().filter(|l| l.starts_with("seq")).count(), 16);
        assert_eq!(load_instance(&text).unwrap(), table3());
    }

    #[test]
    fn save_discounted_additive_is_parametric() {
        let gs = GroundSet::numbered(3).unwrap();
        let f = SequenceFunction::discounted_additive(gs, vec![0.3, 1.0, 2.5], vec![1.0, 0.7, 0.7]).unwrap();
        let text = save_instance(&f);
        assert!(!text.contains("seq"));
        assert!(text.contains("discount 1 0.7 0.7"));
        assert_eq!(load_instance(&text).unwrap(), f);
    }

    #[test]
    fn adversarial_round_trip() {
        let f = make_ssg_adversarial(3, 0.01).unwrap();
        let g = load_instance(&save_instance(&f)).unwrap();
        for s in enumerate_sequences(f.ground_set(), 3).unwrap() {
            assert_eq!(f.eval(&s).unwrap(), g.eval(&s).unwrap());
        }
        // The ground set line is optional for this kind.
        assert_eq!(load_instance("kind ssg_adversarial\nn 3\nepsilon 0.01\n").unwrap(), f);
    }

    #[test]
    fn builtins_resolve() {
        assert_eq!(builtin("builtin:table3").unwrap(), table3());
        let f = builtin("builtin:adversarial?n=4&eps=0.01").unwrap();
        assert_eq!(f.ground_set().len(), 9);
        assert_eq!(builtin("builtin:adversarial").unwrap().ground_set().len(), 21);
        assert!(builtin("builtin:nope").is_err());
        assert!(builtin("table3").is_err());
    }

    #[test]
    fn interchangeable_classes() {
        let f = make_ssg_adversarial(3, 0.01).unwrap();
        assert_eq!(f.interchangeable(), vec![vec![0], vec![1, 2, 3], vec![4, 5, 6]]);
        let gs = GroundSet::numbered(4).unwrap();
        let f = SequenceFunction::discounted_additive(gs, vec![1.0, 2.0, 1.0, 3.0], vec![1.0; 4]).unwrap();
        assert_eq!(f.interchangeable(), vec![vec![0, 2], vec![1], vec![3]]);
        assert_eq!(table3().interchangeable().len(), 3);
    }
}
