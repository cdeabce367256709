//! Line-oriented `.crn` reaction network format.
//!
//! ```text
//! # archetypal network
//! species: X, Y
//! X + Y -> 2 Y ; alpha
//! Y <-> X ; beta, gamma
//! params: alpha=2, beta=1, gamma=1/2
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_traits::Signed;
use serde::Serialize;

use crate::model::{Complex, RateConstant, Reaction, ReactionNetwork};
use crate::rational::{format_rational, parse_rational, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkSource {
    pub text: String,
    pub origin: String,
}

impl NetworkSource {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> Self {
        NetworkSource { text: text.into(), origin: origin.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {}: {}", self.line, self.column, sev, self.message)
    }
}

/// Successful parse plus any warnings.
#[derive(Clone, Debug)]
pub struct ParsedNetwork {
    pub network: ReactionNetwork,
    pub warnings: Vec<ParseDiagnostic>,
}

const MAX_STOICHIOMETRY: u32 = 1000;

struct RawReaction {
    reactant: Vec<(usize, u32)>,
    product: Vec<(usize, u32)>,
    rate: RawRate,
    line: usize,
    column: usize,
}

enum RawRate {
    Literal(Q),
    Named { name: String, line: usize, column: usize },
}

struct Parser<'a> {
    diagnostics: Vec<ParseDiagnostic>,
    species: Vec<String>,
    species_lookup: HashMap<String, usize>,
    header_pinned: bool,
    header_seen: bool,
    reactions: Vec<RawReaction>,
    params: BTreeMap<String, Q>,
    line_no: usize,
    line: &'a str,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits `s` (starting at byte `base` of the line) on `sep`, yielding trimmed pieces with their byte offsets.
fn split_with_offsets(s: &str, base: usize, sep: char) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in s.char_indices() {
        if c == sep {
            out.push(trimmed(&s[start..i], base + start));
            start = i + c.len_utf8();
        }
    }
    out.push(trimmed(&s[start..], base + start));
    out
}

fn trimmed(s: &str, offset: usize) -> (&str, usize) {
    let lead = s.len() - s.trim_start().len();
    (s.trim(), offset + lead)
}

impl<'a> Parser<'a> {
    fn column(&self, byte: usize) -> usize {
        let byte = byte.min(self.line.len());
        self.line.char_indices().take_while(|(i, _)| *i < byte).count() + 1
    }

    fn error(&mut self, byte: usize, message: impl Into<String>) {
        let column = self.column(byte);
        self.diagnostics.push(ParseDiagnostic {
            line: self.line_no,
            column,
            severity: Severity::Error,
            message: message.into(),
        });
    }

    fn warning(&mut self, line: usize, column: usize, message: impl Into<String>) {
        self.diagnostics.push(ParseDiagnostic { line, column, severity: Severity::Warning, message: message.into() });
    }

    fn parse_line(&mut self, raw: &'a str, line_no: usize) {
        self.line_no = line_no;
        self.line = raw;
        let content = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if content.trim().is_empty() {
            return;
        }
        if let Some((head, rest)) = content.split_once(':') {
            let offset = head.len() + 1;
            match head.trim() {
                "species" => return self.parse_species_header(rest, offset, content),
                "params" => return self.parse_params(rest, offset),
                _ => {}
            }
        }
        self.parse_reaction(content);
    }

    fn parse_species_header(&mut self, rest: &str, offset: usize, content: &str) {
        let lead = content.len() - content.trim_start().len();
        if self.header_seen {
            self.error(lead, "duplicate species header");
            return;
        }
        self.header_seen = true;
        if !self.reactions.is_empty() {
            self.error(lead, "species header must precede reactions");
            return;
        }
        self.header_pinned = true;
        if rest.trim().is_empty() {
            return;
        }
        for (name, pos) in split_with_offsets(rest, offset, ',') {
            if !is_identifier(name) {
                self.error(pos, format!("invalid species name `{name}`"));
            } else if self.species_lookup.contains_key(name) {
                self.error(pos, format!("species `{name}` declared twice"));
            } else {
                self.species_lookup.insert(name.to_string(), self.species.len());
                self.species.push(name.to_string());
            }
        }
    }

    fn parse_params(&mut self, rest: &str, offset: usize) {
        if rest.trim().is_empty() {
            return;
        }
        for (item, pos) in split_with_offsets(rest, offset, ',') {
            let Some(eq) = item.find('=') else {
                self.error(pos, format!("expected `name=value`, found `{item}`"));
                continue;
            };
            let (name, raw_value) = (item[..eq].trim(), &item[eq + 1..]);
            let value = raw_value.trim();
            let value_pos = pos + eq + 1 + (raw_value.len() - raw_value.trim_start().len());
            if !is_identifier(name) {
                self.error(pos, format!("invalid parameter name `{name}`"));
                continue;
            }
            match parse_rational(value) {
                None => self.error(value_pos, format!("invalid number `{value}`")),
                Some(v) if !v.is_positive() => {
                    self.error(value_pos, format!("nonpositive rate constant `{value}`"))
                }
                Some(v) => {
                    if self.params.insert(name.to_string(), v).is_some() {
                        self.error(pos, format!("parameter `{name}` defined twice"));
                    }
                }
            }
        }
    }

    fn parse_reaction(&mut self, content: &str) {
        let lead = content.len() - content.trim_start().len();
        let Some(semi) = content.find(';') else {
            self.error(lead, "expected `;` followed by rate constant(s)");
            return;
        };
        let (body, rates) = (&content[..semi], &content[semi + 1..]);
        let (arrow_pos, arrow_len, reversible) = if let Some(p) = body.find("<->") {
            (p, 3, true)
        } else if let Some(p) = body.find("->") {
            (p, 2, false)
        } else {
            self.error(lead, "expected `->` or `<->`");
            return;
        };
        let rest = &body[arrow_pos + arrow_len..];
        if rest.contains("->") {
            self.error(arrow_pos + arrow_len, "more than one arrow");
            return;
        }
        let left = self.parse_complex(&body[..arrow_pos], 0);
        let right = self.parse_complex(rest, arrow_pos + arrow_len);
        let rate_items = split_with_offsets(rates, semi + 1, ',');
        let expected = if reversible { 2 } else { 1 };
        if rate_items.len() != expected {
            self.error(
                semi,
                format!("expected {expected} rate constant(s), found {}", rate_items.len()),
            );
            return;
        }
        let mut parsed_rates = Vec::new();
        for (item, pos) in rate_items {
            if item.is_empty() {
                self.error(pos, "missing rate constant");
            } else if is_identifier(item) {
                parsed_rates.push(RawRate::Named {
                    name: item.to_string(),
                    line: self.line_no,
                    column: self.column(pos),
                });
            } else {
                match parse_rational(item) {
                    Some(v) if v.is_positive() => parsed_rates.push(RawRate::Literal(v)),
                    Some(_) => self.error(pos, format!("nonpositive rate constant `{item}`")),
                    None => self.error(pos, format!("invalid rate constant `{item}`")),
                }
            }
        }
        let (Some(left), Some(right)) = (left, right) else { return };
        if parsed_rates.len() != expected {
            return;
        }
        let column = self.column(lead);
        let mut rates = parsed_rates.into_iter();
        self.reactions.push(RawReaction {
            reactant: left.clone(),
            product: right.clone(),
            rate: rates.next().expect("rate count checked"),
            line: self.line_no,
            column,
        });
        if reversible {
            self.reactions.push(RawReaction {
                reactant: right,
                product: left,
                rate: rates.next().expect("rate count checked"),
                line: self.line_no,
                column,
            });
        }
    }

    fn parse_complex(&mut self, text: &str, offset: usize) -> Option<Vec<(usize, u32)>> {
        let (whole, whole_pos) = trimmed(text, offset);
        if whole.is_empty() {
            self.error(whole_pos, "empty complex (write `0` for the empty complex)");
            return None;
        }
        if whole == "0" {
            return Some(Vec::new());
        }
        let mut terms: Vec<(usize, u32)> = Vec::new();
        let mut ok = true;
        for (term, pos) in split_with_offsets(text, offset, '+') {
            let digits = term.bytes().take_while(u8::is_ascii_digit).count();
            let (coef_text, name) = (&term[..digits], term[digits..].trim_start());
            let coef = if coef_text.is_empty() {
                Some(1)
            } else {
                coef_text.parse::<u32>().ok().filter(|c| (1..=MAX_STOICHIOMETRY).contains(c))
            };
            let Some(coef) = coef else {
                self.error(pos, format!("malformed stoichiometry `{term}`"));
                ok = false;
                continue;
            };
            if !is_identifier(name) {
                self.error(pos, format!("malformed stoichiometry `{term}`"));
                ok = false;
                continue;
            }
            let Some(idx) = self.lookup_species(name, pos) else {
                ok = false;
                continue;
            };
            match terms.iter_mut().find(|(s, _)| *s == idx) {
                Some(entry) => entry.1 = (entry.1 + coef).min(MAX_STOICHIOMETRY),
                None => terms.push((idx, coef)),
            }
        }
        ok.then_some(terms)
    }

    fn lookup_species(&mut self, name: &str, pos: usize) -> Option<usize> {
        if let Some(&idx) = self.species_lookup.get(name) {
            return Some(idx);
        }
        if self.header_pinned {
            self.error(pos, format!("species `{name}` not declared in species header"));
            return None;
        }
        let idx = self.species.len();
        self.species_lookup.insert(name.to_string(), idx);
        self.species.push(name.to_string());
        Some(idx)
    }

    fn finish(mut self) -> Result<ParsedNetwork, Vec<ParseDiagnostic>> {
        let d = self.species.len();
        let mut edges: HashSet<(Vec<u32>, Vec<u32>)> = HashSet::new();
        let mut used = HashSet::new();
        let mut reactions = Vec::new();
        let raws = std::mem::take(&mut self.reactions);
        for raw in raws {
            let to_complex = |terms: &[(usize, u32)]| {
                let mut v = vec![0u32; d];
                for &(s, c) in terms {
                    v[s] = c;
                }
                Complex(v)
            };
            let reactant = to_complex(&raw.reactant);
            let product = to_complex(&raw.product);
            let rate_constant = match raw.rate {
                RawRate::Literal(v) => RateConstant::Value(v),
                RawRate::Named { name, line, column } => {
                    used.insert(name.clone());
                    if !self.params.contains_key(&name) {
                        self.diagnostics.push(ParseDiagnostic {
                            line,
                            column,
                            severity: Severity::Error,
                            message: format!("unresolved parameter `{name}`"),
                        });
                    }
                    RateConstant::Named(name)
                }
            };
            let diag = |message: String| ParseDiagnostic {
                line: raw.line,
                column: raw.column,
                severity: Severity::Error,
                message,
            };
            if reactant == product {
                self.diagnostics.push(diag("reactant and product are identical".into()));
                continue;
            }
            if !edges.insert((reactant.0.clone(), product.0.clone())) {
                self.diagnostics.push(diag(format!(
                    "duplicate edge `{} -> {}`",
                    render_terms(&raw.reactant, &self.species),
                    render_terms(&raw.product, &self.species)
                )));
                continue;
            }
            reactions.push(Reaction { reactant, product, rate_constant });
        }
        let unused: Vec<String> = self.params.keys().filter(|k| !used.contains(*k)).cloned().collect();
        for name in unused {
            self.warning(0, 0, format!("parameter `{name}` is never used"));
        }
        let (errors, warnings): (Vec<_>, Vec<_>) =
            self.diagnostics.into_iter().partition(|d| d.severity == Severity::Error);
        if !errors.is_empty() {
            let mut all = errors;
            all.extend(warnings);
            all.sort();
            return Err(all);
        }
        match ReactionNetwork::new(self.species, reactions, self.params) {
            Ok(network) => Ok(ParsedNetwork { network, warnings }),
            Err(e) => Err(vec![ParseDiagnostic { line: 0, column: 0, severity: Severity::Error, message: e.to_string() }]),
        }
    }
}

fn render_terms(terms: &[(usize, u32)], species: &[String]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    terms
        .iter()
        .map(|&(s, c)| if c == 1 { species[s].clone() } else { format!("{c} {}", species[s]) })
        .collect::<Vec<_>>()
        .join(" + ")
}

pub fn parse_network_with_warnings(src: &NetworkSource) -> Result<ParsedNetwork, Vec<ParseDiagnostic>> {
    let mut parser = Parser {
        diagnostics: Vec::new(),
        species: Vec::new(),
        species_lookup: HashMap::new(),
        header_pinned: false,
        header_seen: false,
        reactions: Vec::new(),
        params: BTreeMap::new(),
        line_no: 0,
        line: "",
    };
    for (i, line) in src.text.lines().enumerate() {
        parser.parse_line(line, i + 1);
    }
    parser.finish()
}

pub fn parse_network(src: &NetworkSource) -> Result<ReactionNetwork, Vec<ParseDiagnostic>> {
    parse_network_with_warnings(src).map(|p| p.network)
}

pub fn parse_str(text: &str) -> Result<ReactionNetwork, Vec<ParseDiagnostic>> {
    parse_network(&NetworkSource::new(text, "<string>"))
}

/// Parses raw bytes; invalid UTF-8 is a diagnostic, not a panic.
pub fn parse_bytes(bytes: &[u8], origin: &str) -> Result<ReactionNetwork, Vec<ParseDiagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_network(&NetworkSource::new(text, origin)),
        Err(e) => {
            let prefix = &bytes[..e.valid_up_to()];
            let line = prefix.iter().filter(|&&b| b == b'\n').count() + 1;
            let line_start = prefix.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
            let column = String::from_utf8_lossy(&prefix[line_start..]).chars().count() + 1;
            Err(vec![ParseDiagnostic {
                line,
                column,
                severity: Severity::Error,
                message: "invalid UTF-8".into(),
            }])
        }
    }
}

/// Canonical text form; parsing it reproduces the network exactly.
pub fn serialize(net: &ReactionNetwork) -> String {
    let mut out = String::new();
    let names = net.species_names();
    out.push_str("species: ");
    out.push_str(&names.join(", "));
    out.push('\n');
    for (idx, reaction) in net.reactions().iter().enumerate() {
        out.push_str(&format!(
            "{} -> {} ; {}\n",
            reaction.reactant.render(net.species()),
            reaction.product.render(net.species()),
            net.rate_label(idx)
        ));
    }
    if !net.parameters().is_empty() {
        let items: Vec<String> =
            net.parameters().iter().map(|(k, v)| format!("{k}={}", format_rational(v))).collect();
        out.push_str("params: ");
        out.push_str(&items.join(", "));
        out.push('\n');
    }
    out
}
