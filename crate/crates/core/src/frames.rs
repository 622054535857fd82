//! Variables, product frames of discernment and sets of configurations.
//!
//! A [`Frame`] is an ordered list of discrete variables. Its configurations
//! are indexed row-major with the last variable varying fastest, so the
//! configuration `(i_1, .., i_n)` has index `sum_k i_k * prod_{j>k} card_j`.
//! An [`EventSet`] is a subset of those configurations stored as a bit
//! vector of length `frame.size()`.

use std::fmt;
use std::sync::Arc;

use crate::bits::Bits;
use crate::error::{Error, Result};

/// Default cap on the number of configurations of a frame.
pub const DEFAULT_MAX_FRAME_SIZE: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Variable {
    name: String,
    labels: Vec<String>,
}

fn valid_token(s: &str) -> bool {
    !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || "(){},*#".contains(c))
}

impl Variable {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let name = name.into();
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let invalid = |reason: String| Error::InvalidDomain {
            name: name.clone(),
            reason,
        };
        if !valid_token(&name) {
            return Err(invalid("name must be a non-empty token".into()));
        }
        if labels.is_empty() {
            return Err(invalid("domain must not be empty".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if !valid_token(l) {
                return Err(invalid(format!("label `{l}` is not a valid token")));
            }
            if labels[..i].contains(l) {
                return Err(invalid(format!("label `{l}` repeated")));
            }
        }
        Ok(Variable { name, labels })
    }

    /// Shorthand for a variable with labels `<prefix>1 .. <prefix>card`,
    /// e.g. `Variable::indexed("X", "x", 2)` gives `X = {x1, x2}`.
    pub fn indexed(name: impl Into<String>, prefix: &str, card: usize) -> Result<Self> {
        Variable::new(name, (1..=card).map(|i| format!("{prefix}{i}")))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn card(&self) -> usize {
        self.labels.len()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// A configuration: one value index per frame variable, in frame order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config(pub Vec<usize>);

impl Config {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

struct FrameInner {
    vars: Vec<Variable>,
    strides: Vec<usize>,
    size: usize,
}

/// An immutable product frame. Cloning is cheap.
#[derive(Clone)]
pub struct Frame {
    inner: Arc<FrameInner>,
}

impl PartialEq for Frame {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.vars == other.inner.vars
    }
}

impl Eq for Frame {}

impl std::hash::Hash for Frame {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.inner.vars.hash(state);
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.inner.vars.iter().map(|v| (&v.name, v.card())))
            .finish()
    }
}

impl Frame {
    pub fn new(vars: impl IntoIterator<Item = Variable>) -> Result<Self> {
        Frame::with_cap(vars, DEFAULT_MAX_FRAME_SIZE)
    }

    pub fn with_cap(vars: impl IntoIterator<Item = Variable>, cap: usize) -> Result<Self> {
        let vars: Vec<Variable> = vars.into_iter().collect();
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        let size: u128 = vars.iter().map(|v| v.card() as u128).product();
        if size > cap as u128 {
            return Err(Error::FrameTooLarge { size, cap });
        }
        let mut strides = vec![1usize; vars.len()];
        for k in (0..vars.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * vars[k + 1].card();
        }
        Ok(Frame {
            inner: Arc::new(FrameInner {
                vars,
                strides,
                size: size as usize,
            }),
        })
    }

    /// The frame with no variables; it has exactly one (empty) configuration.
    pub fn unit() -> Self {
        Frame::new(Vec::new()).expect("unit frame")
    }

    pub fn variables(&self) -> &[Variable] {
        &self.inner.vars
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.inner.vars.iter().map(|v| v.name.as_str())
    }

    pub fn arity(&self) -> usize {
        self.inner.vars.len()
    }

    pub fn size(&self) -> usize {
        self.inner.size
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.inner.vars.iter().position(|v| v.name == name)
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.inner.vars.iter().find(|v| v.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn index_of(&self, config: &Config) -> usize {
        debug_assert_eq!(config.0.len(), self.arity());
        config
            .0
            .iter()
            .zip(&self.inner.strides)
            .map(|(i, s)| i * s)
            .sum()
    }

    pub fn config(&self, mut index: usize) -> Config {
        let mut c = vec![0; self.arity()];
        for (k, s) in self.inner.strides.iter().enumerate() {
            c[k] = index / s;
            index %= s;
        }
        Config(c)
    }

    /// Sub-frame over the named variables, kept in this frame's order.
    pub fn sub_frame<S: AsRef<str>>(&self, names: &[S]) -> Result<Frame> {
        for n in names {
            if !self.contains(n.as_ref()) {
                return Err(Error::UnknownVariable(n.as_ref().to_string()));
            }
        }
        let vars = self
            .inner
            .vars
            .iter()
            .filter(|v| names.iter().any(|n| n.as_ref() == v.name))
            .cloned();
        Frame::new(vars)
    }

    /// This frame's variables followed by the other frame's new ones.
    pub fn union(&self, other: &Frame) -> Result<Frame> {
        if self == other || other.is_subframe_of(self)? {
            return Ok(self.clone());
        }
        let mut vars = self.inner.vars.clone();
        for v in &other.inner.vars {
            match self.variable(&v.name) {
                Some(_) => {}
                None => vars.push(v.clone()),
            }
        }
        Frame::new(vars)
    }

    /// True if every variable of `self` occurs in `other` with the same domain.
    /// A shared name with a different domain is an error.
    pub fn is_subframe_of(&self, other: &Frame) -> Result<bool> {
        let mut all = true;
        for v in &self.inner.vars {
            match other.variable(&v.name) {
                Some(w) if w == v => {}
                Some(_) => return Err(Error::DomainConflict(v.name.clone())),
                None => all = false,
            }
        }
        Ok(all)
    }

    /// Same variables (as a set, with equal domains), possibly in another order.
    pub fn same_variables(&self, other: &Frame) -> bool {
        self.arity() == other.arity() && matches!(self.is_subframe_of(other), Ok(true))
    }

    /// For every configuration index of `self`, the index of its projection in `sub`.
    pub(crate) fn projection_map(&self, sub: &Frame) -> Result<Vec<usize>> {
        if self == sub {
            return Ok((0..self.size()).collect());
        }
        let mut pos = Vec::with_capacity(sub.arity());
        for v in sub.variables() {
            match self.variable(&v.name) {
                Some(w) if w == v => pos.push(self.position(&v.name).unwrap()),
                Some(_) => return Err(Error::DomainConflict(v.name.clone())),
                None => {
                    return Err(Error::VariableMismatch {
                        vars: vec![v.name.clone()],
                    })
                }
            }
        }
        let cards: Vec<usize> = self.inner.vars.iter().map(Variable::card).collect();
        let mut digits = vec![0usize; self.arity()];
        let mut out = Vec::with_capacity(self.size());
        for _ in 0..self.size() {
            out.push(
                pos.iter()
                    .zip(&sub.inner.strides)
                    .map(|(&p, s)| digits[p] * s)
                    .sum(),
            );
            for k in (0..digits.len()).rev() {
                digits[k] += 1;
                if digits[k] < cards[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        Ok(out)
    }

    pub fn full_set(&self) -> EventSet {
        EventSet {
            frame: self.clone(),
            bits: Bits::ones(self.size()),
        }
    }

    pub fn empty_set(&self) -> EventSet {
        EventSet {
            frame: self.clone(),
            bits: Bits::zeros(self.size()),
        }
    }

    /// The set of configurations assigning `label` to variable `name`.
    pub fn cylinder(&self, name: &str, label: &str) -> Result<EventSet> {
        let var = self
            .variable(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        let value = var.label_index(label).ok_or_else(|| {
            Error::InvalidArgument(format!("`{label}` is not a value of `{name}`"))
        })?;
        let k = self.position(name).unwrap();
        Ok(EventSet::from_indices(
            self,
            (0..self.size()).filter(|&i| self.config(i).0[k] == value),
        ))
    }
}

/// A set of configurations of one frame.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EventSet {
    frame: Frame,
    pub(crate) bits: Bits,
}

impl fmt::Debug for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl EventSet {
    pub(crate) fn from_bits(frame: &Frame, bits: Bits) -> Self {
        debug_assert_eq!(bits.len(), frame.size());
        EventSet {
            frame: frame.clone(),
            bits,
        }
    }

    pub fn from_indices(frame: &Frame, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = Bits::zeros(frame.size());
        for i in indices {
            assert!(i < frame.size(), "configuration index {i} out of range");
            bits.set(i);
        }
        EventSet::from_bits(frame, bits)
    }

    pub fn from_configs<'a>(frame: &Frame, configs: impl IntoIterator<Item = &'a Config>) -> Self {
        EventSet::from_indices(frame, configs.into_iter().map(|c| frame.index_of(c)))
    }

    /// Builds a set from label tuples, one label per frame variable.
    pub fn from_labels<S: AsRef<str>>(frame: &Frame, tuples: &[&[S]]) -> Result<Self> {
        let mut bits = Bits::zeros(frame.size());
        for t in tuples {
            if t.len() != frame.arity() {
                return Err(Error::InvalidArgument(format!(
                    "tuple has {} coordinates, frame has {}",
                    t.len(),
                    frame.arity()
                )));
            }
            let mut idx = 0;
            for ((v, l), s) in frame.variables().iter().zip(t.iter()).zip(&frame.inner.strides) {
                let i = v.label_index(l.as_ref()).ok_or_else(|| {
                    Error::InvalidArgument(format!("`{}` is not a value of `{}`", l.as_ref(), v.name))
                })?;
                idx += i * s;
            }
            bits.set(idx);
        }
        Ok(EventSet::from_bits(frame, bits))
    }

    pub fn parse(text: &str, frame: &Frame) -> Result<Self> {
        parse_event(text, frame)
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn len(&self) -> usize {
        self.bits.count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_zero()
    }

    pub fn is_full(&self) -> bool {
        self.bits.is_full()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.bits.get(index)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones_iter()
    }

    pub fn configs(&self) -> impl Iterator<Item = Config> + '_ {
        self.indices().map(|i| self.frame.config(i))
    }

    fn check_frame(&self, other: &EventSet) -> Result<()> {
        if self.frame == other.frame {
            Ok(())
        } else {
            Err(Error::FrameMismatch)
        }
    }

    pub fn union(&self, other: &EventSet) -> Result<EventSet> {
        self.check_frame(other)?;
        Ok(EventSet::from_bits(&self.frame, self.bits.or(&other.bits)))
    }

    pub fn intersection(&self, other: &EventSet) -> Result<EventSet> {
        self.check_frame(other)?;
        Ok(EventSet::from_bits(&self.frame, self.bits.and(&other.bits)))
    }

    pub fn difference(&self, other: &EventSet) -> Result<EventSet> {
        self.check_frame(other)?;
        Ok(EventSet::from_bits(&self.frame, self.bits.and_not(&other.bits)))
    }

    pub fn complement(&self) -> EventSet {
        EventSet::from_bits(&self.frame, self.bits.not())
    }

    pub fn is_subset(&self, other: &EventSet) -> Result<bool> {
        self.check_frame(other)?;
        Ok(self.bits.is_subset(&other.bits))
    }

    /// Projection onto the named variables, over the sub-frame they span.
    pub fn project<S: AsRef<str>>(&self, vars: &[S]) -> Result<EventSet> {
        if vars.is_empty() {
            return Err(Error::InvalidArgument(
                "projection needs at least one variable".into(),
            ));
        }
        let sub = self.frame.sub_frame(vars)?;
        self.project_to(&sub)
    }

    pub(crate) fn project_to(&self, sub: &Frame) -> Result<EventSet> {
        let map = self.frame.projection_map(sub)?;
        Ok(EventSet::from_bits(sub, project_bits(&self.bits, &map, sub.size())))
    }

    /// Cylindrical extension onto a frame containing all of this set's variables.
    pub fn extend(&self, superframe: &Frame) -> Result<EventSet> {
        if !self.frame.is_subframe_of(superframe)? {
            let missing = self
                .frame
                .names()
                .filter(|n| !superframe.contains(n))
                .map(String::from)
                .collect();
            return Err(Error::VariableMismatch { vars: missing });
        }
        let map = superframe.projection_map(&self.frame)?;
        Ok(EventSet::from_bits(
            superframe,
            extend_bits(&self.bits, &map, superframe.size()),
        ))
    }
}

pub(crate) fn project_bits(bits: &Bits, map: &[usize], sub_size: usize) -> Bits {
    let mut out = Bits::zeros(sub_size);
    for i in bits.ones_iter() {
        out.set(map[i]);
    }
    out
}

pub(crate) fn extend_bits(bits: &Bits, map: &[usize], super_size: usize) -> Bits {
    let mut out = Bits::zeros(super_size);
    for (i, &j) in map.iter().enumerate() {
        if bits.get(j) {
            out.set(i);
        }
    }
    out
}

pub fn project_set<S: AsRef<str>>(a: &EventSet, target_vars: &[S]) -> Result<EventSet> {
    a.project(target_vars)
}

pub fn vacuous_extend_set(b: &EventSet, superframe: &Frame) -> Result<EventSet> {
    b.extend(superframe)
}

impl fmt::Display for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_full() {
            return f.write_str("*");
        }
        f.write_str("{")?;
        for (n, c) in self.configs().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            f.write_str("(")?;
            for (k, (v, &i)) in self.frame.variables().iter().zip(&c.0).enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                f.write_str(&v.labels[i])?;
            }
            f.write_str(")")?;
        }
        f.write_str("}")
    }
}

/// Parses `*` or `{(l,..),(l,..)}`; a `*` coordinate means every value of
/// that variable. Whitespace is ignored. Errors report a 1-based column.
pub fn parse_event(text: &str, frame: &Frame) -> Result<EventSet> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks: &toks,
        at: 0,
        end: text.chars().count() + 1,
    };
    let set = p.event(frame)?;
    if let Some((col, t)) = p.peek() {
        return Err(Error::parse(1, col, format!("unexpected `{t}` after event")));
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Star,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Label(String),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Star => f.write_str("*"),
            Tok::LBrace => f.write_str("{"),
            Tok::RBrace => f.write_str("}"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::Comma => f.write_str(","),
            Tok::Label(l) => f.write_str(l),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let mut label: Option<(usize, String)> = None;
    for (i, c) in text.chars().enumerate() {
        let col = i + 1;
        let punct = match c {
            '*' => Some(Tok::Star),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if punct.is_some() || c.is_whitespace() {
            if let Some((at, l)) = label.take() {
                out.push((at, Tok::Label(l)));
            }
            if let Some(t) = punct {
                out.push((col, t));
            }
        } else if c == '#' {
            return Err(Error::parse(1, col, "`#` is not allowed in an event"));
        } else {
            match &mut label {
                Some((_, l)) => l.push(c),
                None => label = Some((col, c.to_string())),
            }
        }
    }
    if let Some((at, l)) = label {
        out.push((at, Tok::Label(l)));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    at: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<(usize, &Tok)> {
        self.toks.get(self.at).map(|(c, t)| (*c, t))
    }

    fn next(&mut self, what: &str) -> Result<(usize, Tok)> {
        match self.toks.get(self.at) {
            Some((c, t)) => {
                self.at += 1;
                Ok((*c, t.clone()))
            }
            None => Err(Error::parse(1, self.end, format!("expected {what}, found end of input"))),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        let (col, t) = self.next(&format!("`{tok}`"))?;
        if t == tok {
            Ok(())
        } else {
            Err(Error::parse(1, col, format!("expected `{tok}`, found `{t}`")))
        }
    }

    fn event(&mut self, frame: &Frame) -> Result<EventSet> {
        let (col, t) = self.next("`*` or `{`")?;
        match t {
            Tok::Star => Ok(frame.full_set()),
            Tok::LBrace => {
                let mut bits = Bits::zeros(frame.size());
                loop {
                    self.tuple(frame, &mut bits)?;
                    let (col, t) = self.next("`,` or `}`")?;
                    match t {
                        Tok::Comma => continue,
                        Tok::RBrace => break,
                        other => {
                            return Err(Error::parse(1, col, format!("expected `,` or `}}`, found `{other}`")))
                        }
                    }
                }
                Ok(EventSet::from_bits(frame, bits))
            }
            other => Err(Error::parse(1, col, format!("expected `*` or `{{`, found `{other}`"))),
        }
    }

    fn tuple(&mut self, frame: &Frame, bits: &mut Bits) -> Result<()> {
        self.expect(Tok::LParen)?;
        // per coordinate: None means every value
        let mut coords: Vec<Option<usize>> = Vec::with_capacity(frame.arity());
        loop {
            let (col, t) = self.next("a label or `*`")?;
            let k = coords.len();
            let var = frame.variables().get(k).ok_or_else(|| {
                Error::parse(1, col, format!("tuple has more than {} coordinates", frame.arity()))
            })?;
            match t {
                Tok::Star => coords.push(None),
                Tok::Label(l) => {
                    let i = var.label_index(&l).ok_or_else(|| {
                        Error::parse(1, col, format!("`{l}` is not a value of `{}`", var.name))
                    })?;
                    coords.push(Some(i));
                }
                other => {
                    return Err(Error::parse(1, col, format!("expected a label or `*`, found `{other}`")))
                }
            }
            let (col, t) = self.next("`,` or `)`")?;
            match t {
                Tok::Comma => continue,
                Tok::RParen => {
                    if coords.len() != frame.arity() {
                        return Err(Error::parse(
                            1,
                            col,
                            format!("tuple has {} coordinates, frame has {}", coords.len(), frame.arity()),
                        ));
                    }
                    break;
                }
                other => return Err(Error::parse(1, col, format!("expected `,` or `)`, found `{other}`"))),
            }
        }
        for i in 0..frame.size() {
            let c = frame.config(i);
            if coords.iter().zip(&c.0).all(|(want, &v)| want.is_none_or(|w| w == v)) {
                bits.set(i);
            }
        }
        Ok(())
    }
}
