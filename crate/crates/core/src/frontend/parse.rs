//! OpenQASM 2.0 subset reader.

use std::f64::consts::PI;

use super::{Circuit, FrontendError, Gate, Measurement};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Str(String),
    Sym(char),
    Arrow,
    Eq2,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, FrontendError> {
    let mut out = Vec::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = match raw.find("//") {
            Some(p) => &raw[..p],
            None => raw,
        };
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line });
            } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v = s
                    .parse::<f64>()
                    .map_err(|_| FrontendError::Parse { line, message: format!("bad number `{s}`") })?;
                out.push(Token { tok: Tok::Num(v), line });
            } else if c == '"' {
                let start = i + 1;
                i += 1;
                while i < chars.len() && chars[i] != '"' {
                    i += 1;
                }
                if i >= chars.len() {
                    return Err(FrontendError::Parse { line, message: "unterminated string".into() });
                }
                out.push(Token { tok: Tok::Str(chars[start..i].iter().collect()), line });
                i += 1;
            } else if c == '-' && chars.get(i + 1) == Some(&'>') {
                out.push(Token { tok: Tok::Arrow, line });
                i += 2;
            } else if c == '=' && chars.get(i + 1) == Some(&'=') {
                out.push(Token { tok: Tok::Eq2, line });
                i += 2;
            } else if "[](){};,+-*/^".contains(c) {
                out.push(Token { tok: Tok::Sym(c), line });
                i += 1;
            } else {
                return Err(FrontendError::Parse { line, message: format!("unexpected character `{c}`") });
            }
        }
    }
    Ok(out)
}

struct Register {
    name: String,
    offset: usize,
    size: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    qregs: Vec<Register>,
    cregs: Vec<Register>,
    circuit: Circuit,
}

/// An operand: one qubit or a whole register (broadcast).
enum Operand {
    One(usize),
    All(usize, usize),
}

impl Parser {
    fn line(&self) -> usize {
        self.toks.get(self.pos).or_else(|| self.toks.last()).map_or(1, |t| t.line)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, FrontendError> {
        Err(FrontendError::Parse { line: self.line(), message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<(), FrontendError> {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == c => {
                self.pos += 1;
                Ok(())
            }
            other => {
                let found = format!("{other:?}");
                self.err(format!("expected `{c}`, found {found}"))
            }
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, FrontendError> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            other => {
                self.pos -= 1;
                self.err(format!("expected identifier, found {other:?}"))
            }
        }
    }

    fn integer(&mut self) -> Result<usize, FrontendError> {
        match self.next() {
            Some(Tok::Num(v)) if v >= 0.0 && v.fract() == 0.0 => Ok(v as usize),
            other => {
                self.pos -= 1;
                self.err(format!("expected non-negative integer, found {other:?}"))
            }
        }
    }

    fn expr(&mut self) -> Result<f64, FrontendError> {
        let mut v = self.term()?;
        loop {
            if self.eat_sym('+') {
                v += self.term()?;
            } else if self.eat_sym('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, FrontendError> {
        let mut v = self.power()?;
        loop {
            if self.eat_sym('*') {
                v *= self.power()?;
            } else if self.eat_sym('/') {
                v /= self.power()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn power(&mut self) -> Result<f64, FrontendError> {
        let base = self.unary()?;
        if self.eat_sym('^') {
            let exp = self.power()?;
            return Ok(base.powf(exp));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<f64, FrontendError> {
        if self.eat_sym('-') {
            return Ok(-self.unary()?);
        }
        if self.eat_sym('+') {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<f64, FrontendError> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(v),
            Some(Tok::Sym('(')) => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Some(Tok::Ident(name)) => {
                if name == "pi" {
                    return Ok(PI);
                }
                let f: fn(f64) -> f64 = match name.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => {
                        self.pos -= 1;
                        return self.err(format!("unknown identifier `{name}` in expression"));
                    }
                };
                self.expect_sym('(')?;
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(f(v))
            }
            other => {
                self.pos -= 1;
                self.err(format!("expected expression, found {other:?}"))
            }
        }
    }

    fn operand(&mut self, quantum: bool) -> Result<Operand, FrontendError> {
        let name = self.ident()?;
        let regs = if quantum { &self.qregs } else { &self.cregs };
        let Some(reg) = regs.iter().find(|r| r.name == name) else {
            let kind = if quantum { "qreg" } else { "creg" };
            return self.err(format!("unknown {kind} `{name}`"));
        };
        let (offset, size) = (reg.offset, reg.size);
        if self.eat_sym('[') {
            let i = self.integer()?;
            self.expect_sym(']')?;
            if i >= size {
                return self.err(format!("index {i} out of range for `{name}[{size}]`"));
            }
            Ok(Operand::One(offset + i))
        } else {
            Ok(Operand::All(offset, size))
        }
    }

    fn operand_list(&mut self, quantum: bool) -> Result<Vec<Operand>, FrontendError> {
        let mut ops = vec![self.operand(quantum)?];
        while self.eat_sym(',') {
            ops.push(self.operand(quantum)?);
        }
        Ok(ops)
    }

    /// Expands register operands into per-qubit argument tuples.
    fn broadcast(&self, ops: &[Operand]) -> Result<Vec<Vec<usize>>, FrontendError> {
        let width = ops.iter().filter_map(|o| match o {
            Operand::All(_, n) => Some(*n),
            Operand::One(_) => None,
        });
        let mut n = None;
        for w in width {
            match n {
                None => n = Some(w),
                Some(prev) if prev != w => return self.err("register sizes differ in broadcast"),
                _ => {}
            }
        }
        let n = n.unwrap_or(1);
        Ok((0..n)
            .map(|k| {
                ops.iter()
                    .map(|o| match *o {
                        Operand::One(q) => q,
                        Operand::All(off, _) => off + k,
                    })
                    .collect()
            })
            .collect())
    }

    fn declare(&mut self, quantum: bool) -> Result<(), FrontendError> {
        let name = self.ident()?;
        self.expect_sym('[')?;
        let size = self.integer()?;
        self.expect_sym(']')?;
        self.expect_sym(';')?;
        let regs = if quantum { &mut self.qregs } else { &mut self.cregs };
        if regs.iter().any(|r| r.name == name) {
            return self.err(format!("register `{name}` declared twice"));
        }
        let offset = regs.iter().map(|r| r.size).sum();
        regs.push(Register { name, offset, size });
        if quantum {
            self.circuit.n_qubits = offset + size;
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), FrontendError> {
        let line = self.line();
        let head = self.ident()?;
        match head.as_str() {
            "OPENQASM" => {
                match self.next() {
                    Some(Tok::Num(v)) if (2.0..3.0).contains(&v) => {}
                    other => return self.err(format!("unsupported OPENQASM version {other:?}")),
                }
                self.expect_sym(';')
            }
            "include" => {
                match self.next() {
                    Some(Tok::Str(_)) => {}
                    _ => return self.err("include expects a file name string"),
                }
                self.expect_sym(';')
            }
            "qreg" => self.declare(true),
            "creg" => self.declare(false),
            "barrier" => {
                let _ = self.operand_list(true)?;
                self.expect_sym(';')?;
                let at = self.circuit.gates.len();
                if self.circuit.barriers.last() != Some(&at) {
                    self.circuit.barriers.push(at);
                }
                Ok(())
            }
            "measure" => {
                let q = self.operand(true)?;
                match self.next() {
                    Some(Tok::Arrow) => {}
                    _ => return self.err("expected `->` in measure"),
                }
                let c = self.operand(false)?;
                self.expect_sym(';')?;
                let pairs: Vec<(usize, usize)> = match (q, c) {
                    (Operand::One(q), Operand::One(c)) => vec![(q, c)],
                    (Operand::All(qo, qn), Operand::All(co, cn)) if qn == cn => {
                        (0..qn).map(|k| (qo + k, co + k)).collect()
                    }
                    _ => return self.err("measure operands must both be bits or equal-size registers"),
                };
                self.circuit.measurements.extend(pairs.into_iter().map(|(qubit, clbit)| Measurement { qubit, clbit }));
                Ok(())
            }
            "if" | "reset" | "gate" | "opaque" => Err(FrontendError::UnsupportedGate { line, name: head }),
            _ => self.gate_call(head, line),
        }
    }

    fn gate_call(&mut self, name: String, line: usize) -> Result<(), FrontendError> {
        let mut params = Vec::new();
        if self.eat_sym('(') && !self.eat_sym(')') {
            params.push(self.expr()?);
            while self.eat_sym(',') {
                params.push(self.expr()?);
            }
            self.expect_sym(')')?;
        }
        let (n_params, n_qubits) = match name.as_str() {
            "u3" | "U" => (3, 1),
            "u2" => (2, 1),
            "u1" | "rx" | "ry" | "rz" => (1, 1),
            "h" | "x" | "y" | "z" | "s" | "sdg" | "t" | "tdg" | "id" => (0, 1),
            "cx" | "CX" | "cz" | "swap" => (0, 2),
            _ => return Err(FrontendError::UnsupportedGate { line, name }),
        };
        if params.len() != n_params {
            return self.err(format!("`{name}` takes {n_params} parameters, got {}", params.len()));
        }
        let ops = self.operand_list(true)?;
        self.expect_sym(';')?;
        if ops.len() != n_qubits {
            return self.err(format!("`{name}` takes {n_qubits} qubit operands, got {}", ops.len()));
        }
        for args in self.broadcast(&ops)? {
            if n_qubits == 2 && args[0] == args[1] {
                return self.err(format!("`{name}` applied twice to qubit {}", args[0]));
            }
            let q = args[0];
            let p = |i: usize| params[i];
            let gate = match name.as_str() {
                "u3" | "U" => Gate::u3(q, p(0), p(1), p(2)),
                "u2" => Gate::U2(q, p(0), p(1)),
                "u1" => Gate::U1(q, p(0)),
                "rx" => Gate::Rx(q, p(0)),
                "ry" => Gate::Ry(q, p(0)),
                "rz" => Gate::Rz(q, p(0)),
                "h" => Gate::H(q),
                "x" => Gate::X(q),
                "y" => Gate::Y(q),
                "z" => Gate::Z(q),
                "s" => Gate::S(q),
                "sdg" => Gate::Sdg(q),
                "t" => Gate::T(q),
                "tdg" => Gate::Tdg(q),
                "id" => continue,
                "cx" | "CX" => Gate::Cx(q, args[1]),
                "cz" => Gate::Cz(q, args[1]),
                "swap" => Gate::Swap(q, args[1]),
                _ => unreachable!(),
            };
            self.circuit.gates.push(gate);
        }
        Ok(())
    }
}

/// Parses an OpenQASM 2.0 program into a circuit over one flattened register.
///
/// Classical registers and barriers are accepted; measurements are recorded
/// but contribute no gates.
pub fn parse_openqasm(text: &str) -> Result<Circuit, FrontendError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, qregs: Vec::new(), cregs: Vec::new(), circuit: Circuit::new("", 0) };
    while p.pos < p.toks.len() {
        p.statement()?;
    }
    if p.circuit.barriers.last() == Some(&p.circuit.gates.len()) {
        p.circuit.barriers.pop();
    }
    p.circuit.barriers.retain(|&b| b > 0);
    Ok(p.circuit)
}
