//! Canonical text form of NA programs.

use std::fmt::Write as _;

use super::{AtomState, IrError, NAInstruction, NAProgram, Site, DIALECT_VERSION, SITE_TOL};

fn coord(v: f64) -> String {
    let v = if v.abs() < 5e-4 { 0.0 } else { v };
    format!("{v:.3}")
}

fn sites(out: &mut String, s: &[Site]) {
    out.push('[');
    for (i, &(x, y)) in s.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "({},{})", coord(x), coord(y));
    }
    out.push(']');
}

fn angle(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

/// Canonical text: version pragma, owner annotations, then one instruction
/// per line. Coordinates use three decimals; angles use the shortest exact
/// decimal form so re-parsing is lossless.
pub fn emit_na(program: &NAProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "#pragma {DIALECT_VERSION}");
    for (id, label) in &program.qubit_map {
        let _ = writeln!(out, "@owner {id} {};", serde_json::to_string(label).expect("string serializes"));
    }
    for instr in &program.instructions {
        match instr {
            NAInstruction::Init { sites: s, qubit_ids } => {
                out.push_str("@init ");
                sites(&mut out, s);
                out.push_str(" [");
                for (i, q) in qubit_ids.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "{q}");
                }
                out.push(']');
            }
            NAInstruction::Move { from, to } => {
                out.push_str("@move ");
                sites(&mut out, from);
                out.push(' ');
                sites(&mut out, to);
            }
            NAInstruction::U3Batch { sites: s, angles } => {
                out.push_str("@u3 ");
                sites(&mut out, s);
                out.push_str(" [");
                for (i, &(t, p, l)) in angles.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "({},{},{})", angle(t), angle(p), angle(l));
                }
                out.push(']');
            }
            NAInstruction::Rydberg => out.push_str("@rydberg"),
        }
        out.push_str(";\n");
    }
    out
}

struct Cursor<'a> {
    s: &'a [u8],
    i: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, IrError> {
        Err(IrError::Parse { line: self.line, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            if self.s[self.i] == b'\n' {
                self.line += 1;
            }
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.i).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), IrError> {
        if self.eat(c) {
            Ok(())
        } else {
            let found = self.peek().map_or("end of input".to_string(), |b| format!("`{}`", b as char));
            self.err(format!("expected `{}`, found {found}", c as char))
        }
    }

    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.i;
        while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_') {
            self.i += 1;
        }
        std::str::from_utf8(&self.s[start..self.i]).unwrap_or("")
    }

    fn number(&mut self) -> Result<f64, IrError> {
        self.skip_ws();
        let start = self.i;
        while self.i < self.s.len() && (self.s[self.i].is_ascii_digit() || b"+-.eE".contains(&self.s[self.i])) {
            self.i += 1;
        }
        let text = std::str::from_utf8(&self.s[start..self.i]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => self.err(format!("expected number, found `{text}`")),
        }
    }

    fn integer(&mut self) -> Result<i64, IrError> {
        let v = self.number()?;
        if v.fract() != 0.0 {
            return self.err(format!("expected integer, found {v}"));
        }
        Ok(v as i64)
    }

    /// `(a, b, ...)` with commas optional between elements.
    fn tuple(&mut self, n: usize) -> Result<Vec<f64>, IrError> {
        self.expect(b'(')?;
        let mut v = Vec::with_capacity(n);
        for k in 0..n {
            if k > 0 {
                self.eat(b',');
            }
            v.push(self.number()?);
        }
        self.expect(b')')?;
        Ok(v)
    }

    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, IrError>) -> Result<Vec<T>, IrError> {
        self.expect(b'[')?;
        let mut v = Vec::new();
        if self.eat(b']') {
            return Ok(v);
        }
        loop {
            v.push(item(self)?);
            if self.eat(b']') {
                return Ok(v);
            }
            self.expect(b',')?;
        }
    }

    fn sites(&mut self) -> Result<Vec<Site>, IrError> {
        self.list(|c| c.tuple(2).map(|t| (t[0], t[1])))
    }

    /// Skips a QASM statement body up to the terminating `;`.
    fn body(&mut self) -> Result<(), IrError> {
        while let Some(c) = self.peek() {
            self.i += 1;
            if c == b';' {
                return Ok(());
            }
        }
        self.err("missing `;`")
    }
}

/// The `@move row|column <index> <offset>` surface form, normalized against
/// current positions: row k is the k-th distinct y in ascending order.
fn axis_move(state: &AtomState, row: bool, index: i64, offset: f64) -> Option<NAInstruction> {
    let key = |s: &Site| if row { s.1 } else { s.0 };
    let mut values: Vec<f64> = state.pos.iter().map(key).collect();
    values.sort_by(f64::total_cmp);
    values.dedup_by(|a, b| (*a - *b).abs() <= SITE_TOL);
    let target = *values.get(usize::try_from(index).ok()?)?;
    let from: Vec<Site> = state.pos.iter().copied().filter(|s| (key(s) - target).abs() <= SITE_TOL).collect();
    let to = from.iter().map(|&(x, y)| if row { (x, y + offset) } else { (x + offset, y) }).collect();
    Some(NAInstruction::Move { from, to })
}

/// Parses annotated QASM. Every `@init/@move/@u3/@rydberg` annotation becomes
/// one instruction; other annotations except `@owner` and plain statements
/// are ignored. The stream is replayed to validate positions.
pub fn parse_na(text: &str) -> Result<NAProgram, IrError> {
    let mut program = NAProgram { instructions: Vec::new(), ..NAProgram::default() };
    let mut state = AtomState::default();
    let mut stripped = String::with_capacity(text.len());
    for (ln, line) in text.lines().enumerate() {
        let trimmed = line.trim_start();
        if let Some(rest) = trimmed.strip_prefix("#pragma") {
            let rest = rest.trim();
            if rest.starts_with("MULTIQ-NA") && rest != DIALECT_VERSION {
                return Err(IrError::Parse { line: ln + 1, message: format!("unsupported dialect `{rest}`") });
            }
        } else {
            stripped.push_str(line.split("//").next().unwrap_or(""));
        }
        stripped.push('\n');
    }
    let mut c = Cursor { s: stripped.as_bytes(), i: 0, line: 1 };
    while c.peek().is_some() {
        if !c.eat(b'@') {
            c.body()?;
            continue;
        }
        let line = c.line;
        let kw = c.word();
        let instr = match kw {
            "init" => {
                let sites = c.sites()?;
                let qubit_ids = if c.peek() == Some(b'[') {
                    c.list(|c| {
                        let v = c.integer()?;
                        usize::try_from(v).or_else(|_| c.err("negative qubit id"))
                    })?
                } else {
                    (0..sites.len()).collect()
                };
                Some(NAInstruction::Init { sites, qubit_ids })
            }
            "move" => {
                if c.peek() == Some(b'[') {
                    let from = c.sites()?;
                    let to = c.sites()?;
                    Some(NAInstruction::Move { from, to })
                } else {
                    let axis = c.word();
                    let row = match axis {
                        "row" => true,
                        "column" => false,
                        other => return c.err(format!("expected `row` or `column`, found `{other}`")),
                    };
                    let index = c.integer()?;
                    let offset = c.integer()? as f64;
                    match axis_move(&state, row, index, offset) {
                        Some(m) => Some(m),
                        None => return c.err(format!("{axis} {index} holds no atom")),
                    }
                }
            }
            "u3" => {
                let sites = c.sites()?;
                let angles = c.list(|c| c.tuple(3).map(|t| (t[0], t[1], t[2])))?;
                Some(NAInstruction::U3Batch { sites, angles })
            }
            "rydberg" => Some(NAInstruction::Rydberg),
            "owner" => {
                let id = c.integer()?;
                c.skip_ws();
                let rest = &stripped[c.i..];
                let end = rest.find(';').map_or(rest.len(), |e| e);
                let label: String = serde_json::from_str(rest[..end].trim())
                    .or_else(|_| c.err("owner label must be a quoted string"))?;
                c.i += end;
                program.qubit_map.insert(id as usize, label);
                None
            }
            "" => return c.err("empty annotation keyword"),
            _ => None,
        };
        c.body()?;
        if let Some(instr) = instr {
            let index = program.instructions.len();
            instr.check_arity().map_err(|message| IrError::Parse { line, message })?;
            state.apply(index, &instr)?;
            program.instructions.push(instr);
        }
    }
    if program.instructions.is_empty() {
        return Err(IrError::Parse { line: c.line, message: "program has no instructions".into() });
    }
    Ok(program)
}
