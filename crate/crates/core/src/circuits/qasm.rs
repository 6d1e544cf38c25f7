//! OpenQASM 2.0 subset: one `qreg`, the gate set of [`GateKind`] with any
//! number of `c` prefixes for controls (`cx`, `ccx`, `cu1`, `cswap`, ...),
//! and `barrier` (ignored). `creg` declarations are accepted; anything that
//! would use them (`measure`, `if`) is rejected, as are `reset` and custom
//! `gate`/`opaque` definitions.

use super::{Circuit, Gate, GateKind};
use crate::error::ParseError;

/// Prints a circuit as OpenQASM 2.0 on register `q`.
pub fn to_qasm(circuit: &Circuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    out.push_str(&format!("qreg q[{}];\n", circuit.n_qubits()));
    for g in circuit.gates() {
        out.push_str(&g.to_string());
        out.push('\n');
    }
    out
}

struct Statement<'a> {
    line: usize,
    text: &'a str,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// Splits comment-free source into `;`-terminated statements, remembering
/// the line each one starts on.
fn statements(src: &str) -> Result<Vec<Statement<'_>>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut start = 0;
    let mut start_line = 1;
    let mut seen_text = false;
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                // comments were blanked by the caller
                unreachable!()
            }
            b'\n' => line += 1,
            b';' => {
                out.push(Statement {
                    line: start_line,
                    text: src[start..i].trim(),
                });
                start = i + 1;
                seen_text = false;
            }
            b'{' | b'}' => {
                let text = src[start..i].trim();
                return Err(err(
                    if seen_text { start_line } else { line },
                    format!(
                        "unsupported construct near `{}`",
                        text.split_whitespace().next().unwrap_or("{")
                    ),
                ));
            }
            c if !c.is_ascii_whitespace() && !seen_text => {
                seen_text = true;
                start_line = line;
            }
            _ => {}
        }
        i += 1;
    }
    let rest = src[start..].trim();
    if !rest.is_empty() {
        return Err(err(start_line, format!("missing `;` after `{rest}`")));
    }
    Ok(out)
}

fn strip_comments(src: &str) -> String {
    src.lines()
        .map(|l| match l.find("//") {
            Some(i) => &l[..i],
            None => l,
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Parses the supported OpenQASM 2.0 subset.
pub fn parse_qasm(src: &str) -> Result<Circuit, ParseError> {
    let clean = strip_comments(src);
    let mut reg: Option<(String, usize)> = None;
    let mut circuit: Option<Circuit> = None;
    for (idx, st) in statements(&clean)?.into_iter().enumerate() {
        let line = st.line;
        let text = st.text;
        if text.is_empty() {
            continue;
        }
        let (head, rest) = split_head(text);
        match head {
            "OPENQASM" => {
                if idx != 0 {
                    return Err(err(line, "OPENQASM header must come first"));
                }
                if rest.trim() != "2.0" {
                    return Err(err(line, format!("unsupported OpenQASM version `{}`", rest.trim())));
                }
            }
            "include" => {
                if rest.trim() != "\"qelib1.inc\"" {
                    return Err(err(line, format!("unsupported include {}", rest.trim())));
                }
            }
            "qreg" => {
                if reg.is_some() {
                    return Err(err(line, "only one qreg is supported"));
                }
                let (name, size) = parse_indexed(rest.trim()).map_err(|m| err(line, m))?;
                if size == 0 {
                    return Err(err(line, "qreg must have at least one qubit"));
                }
                circuit = Some(Circuit::new(size));
                reg = Some((name, size));
            }
            "creg" => {
                parse_indexed(rest.trim()).map_err(|m| err(line, m))?;
            }
            "barrier" => {}
            "measure" | "reset" | "if" | "gate" | "opaque" => {
                return Err(err(line, format!("unsupported statement `{head}`")));
            }
            _ => {
                let (Some((rname, _)), Some(c)) = (&reg, circuit.as_mut()) else {
                    return Err(err(line, "gate used before qreg declaration"));
                };
                let gate = parse_gate(text, rname).map_err(|m| err(line, m))?;
                c.push(gate).map_err(|e| err(line, e.to_string()))?;
            }
        }
    }
    circuit.ok_or_else(|| err(1, "no qreg declared"))
}

fn split_head(text: &str) -> (&str, &str) {
    let end = text
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(text.len());
    (&text[..end], &text[end..])
}

/// `name[idx]` → (name, idx).
fn parse_indexed(s: &str) -> Result<(String, usize), String> {
    let open = s
        .find('[')
        .ok_or_else(|| format!("expected `name[index]`, got `{s}`"))?;
    let close = s
        .rfind(']')
        .filter(|&c| c > open)
        .ok_or_else(|| format!("unclosed `[` in `{s}`"))?;
    if !s[close + 1..].trim().is_empty() {
        return Err(format!("unexpected text after `{}`", &s[..=close]));
    }
    let name = s[..open].trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("bad identifier `{name}`"));
    }
    let idx = s[open + 1..close]
        .trim()
        .parse::<usize>()
        .map_err(|_| format!("bad index in `{s}`"))?;
    Ok((name.to_string(), idx))
}

fn parse_gate(text: &str, reg: &str) -> Result<Gate, String> {
    let (name, mut rest) = split_head(text);
    let ncontrols = name.bytes().take_while(|&b| b == b'c').count();
    let kind = GateKind::from_name(&name[ncontrols..]).ok_or_else(|| format!("unsupported gate `{name}`"))?;
    let mut params = Vec::new();
    rest = rest.trim_start();
    if let Some(after) = rest.strip_prefix('(') {
        let close = matching_paren(after).ok_or("unclosed parameter list")?;
        for p in split_top_level(&after[..close]) {
            params.push(eval_expr(p)?);
        }
        rest = &after[close + 1..];
    }
    let mut qubits = Vec::new();
    for arg in rest.split(',') {
        let arg = arg.trim();
        if !arg.contains('[') {
            return Err(format!("register-wide argument `{arg}` is not supported"));
        }
        let (name, idx) = parse_indexed(arg)?;
        if name != reg {
            return Err(format!("unknown register `{name}`"));
        }
        qubits.push(idx);
    }
    let needed = ncontrols + kind.target_count();
    if qubits.len() != needed {
        return Err(format!(
            "`{name}` takes {needed} qubit argument(s), got {}",
            qubits.len()
        ));
    }
    let targets = qubits.split_off(ncontrols);
    Ok(Gate::new(kind, params, targets, qubits))
}

fn matching_paren(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' if depth == 0 => return Some(i),
            ')' => depth -= 1,
            _ => {}
        }
    }
    None
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = s.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let lit: String = chars[start..i].iter().collect();
            toks.push(Tok::Num(lit.parse().map_err(|_| format!("bad number `{lit}`"))?));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            toks.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(format!("unexpected character `{c}` in expression"));
        }
    }
    Ok(toks)
}

/// Evaluates a real parameter expression (numbers, `pi`, `+ - * / ^`,
/// parentheses and the OpenQASM unary functions).
fn eval_expr(s: &str) -> Result<f64, String> {
    let toks = tokenize(s)?;
    if toks.is_empty() {
        return Err("empty parameter".into());
    }
    let mut p = ExprParser { toks: &toks, pos: 0 };
    let v = p.sum()?;
    if p.pos != toks.len() {
        return Err(format!("trailing tokens in `{}`", s.trim()));
    }
    if !v.is_finite() {
        return Err(format!("parameter `{}` is not finite", s.trim()));
    }
    Ok(v)
}

struct ExprParser<'a> {
    toks: &'a [Tok],
    pos: usize,
}

impl ExprParser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.toks.get(self.pos) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn sum(&mut self) -> Result<f64, String> {
        let mut v = self.product()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let r = self.product()?;
            v = if op == '+' { v + r } else { v - r };
        }
        Ok(v)
    }

    fn product(&mut self) -> Result<f64, String> {
        let mut v = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let r = self.unary()?;
            v = if op == '*' { v * r } else { v / r };
        }
        Ok(v)
    }

    fn unary(&mut self) -> Result<f64, String> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<f64, String> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(base.powf(exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64, String> {
        let tok = self.toks.get(self.pos).cloned().ok_or("unexpected end of expression")?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(v),
            Tok::Op('(') => {
                let v = self.sum()?;
                if self.peek_op() != Some(')') {
                    return Err("expected `)`".into());
                }
                self.pos += 1;
                Ok(v)
            }
            Tok::Ident(name) if name == "pi" => Ok(std::f64::consts::PI),
            Tok::Ident(name) => {
                let f: fn(f64) -> f64 = match name.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => return Err(format!("unknown identifier `{name}`")),
                };
                if self.peek_op() != Some('(') {
                    return Err(format!("expected `(` after `{name}`"));
                }
                Ok(f(self.atom()?))
            }
            Tok::Op(c) => Err(format!("unexpected `{c}`")),
        }
    }
}
