//! Tokenizer and recursive-descent parser.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' int)*
//! atom    := number | ident | ident '(' args ')' | '(' sum ')'
//! ```

use super::{BinOp, Expr, ExprError, ExprKind, Func, Span};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

fn lex(src: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        let span_at = |len: usize, line: usize, col: usize| Span {
            start,
            end: start + len,
            line,
            col,
        };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token {
                tok,
                span: span_at(1, line, col),
            });
            col += 1;
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut j = i;
            let mut seen_exp = false;
            while j < chars.len() {
                let ch = chars[j].1;
                if ch.is_ascii_digit() || ch == '.' {
                    j += 1;
                } else if (ch == 'e' || ch == 'E') && !seen_exp {
                    // exponent only if followed by digits (optionally signed)
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k].1 == '+' || chars[k].1 == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].1.is_ascii_digit() {
                        seen_exp = true;
                        j = k;
                    } else {
                        break;
                    }
                } else {
                    break;
                }
            }
            let end = chars.get(j).map_or(src.len(), |p| p.0);
            let text = &src[start..end];
            let span = span_at(j - i, line, col);
            let v: f64 = text.parse().map_err(|_| ExprError::Syntax {
                msg: format!("malformed number '{text}'"),
                line: span.line,
                col: span.col,
            })?;
            out.push(Token {
                tok: Tok::Num(v),
                span,
            });
            col += j - i;
            i = j;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].1.is_ascii_alphanumeric() || chars[j].1 == '_') {
                j += 1;
            }
            let end = chars.get(j).map_or(src.len(), |p| p.0);
            out.push(Token {
                tok: Tok::Ident(src[start..end].to_string()),
                span: span_at(j - i, line, col),
            });
            col += j - i;
            i = j;
            continue;
        }
        return Err(ExprError::Syntax {
            msg: format!("unexpected character '{c}'"),
            line,
            col,
        });
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    /// Position reported for errors at end of input: just past the last token.
    eof: Span,
}

pub(super) fn parse(src: &str) -> Result<Expr, ExprError> {
    let toks = lex(src)?;
    let eof = match toks.last() {
        Some(t) => Span {
            start: t.span.end,
            end: t.span.end,
            line: t.span.line,
            col: t.span.col + (t.span.end - t.span.start),
        },
        None => Span {
            start: 0,
            end: 0,
            line: 1,
            col: 1,
        },
    };
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        eof,
    };
    let e = p.sum()?;
    if let Some(t) = p.peek() {
        return Err(p.err_at(&t.span.clone(), format!("unexpected {}", describe(&t.tok))));
    }
    Ok(e)
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Caret => "'^'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Comma => "','".into(),
    }
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn err_at(&self, span: &Span, msg: String) -> ExprError {
        ExprError::Syntax {
            msg,
            line: span.line,
            col: span.col,
        }
    }

    fn eof_err(&self, what: &str) -> ExprError {
        self.err_at(&self.eof, format!("unexpected end of input, expected {what}"))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Span, ExprError> {
        match self.next() {
            Some(t) if t.tok == tok => Ok(t.span),
            Some(t) => Err(self.err_at(&t.span, format!("expected {what}, found {}", describe(&t.tok)))),
            None => Err(self.eof_err(what)),
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        while let Some(t) = self.peek() {
            let op = match t.tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(t) = self.peek() {
            let op = match t.tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if let Some(Token {
            tok: Tok::Minus,
            span,
        }) = self.peek().cloned()
        {
            self.pos += 1;
            let inner = self.unary()?;
            let span = span.join(&inner.span);
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        let mut exps = Vec::new();
        let mut end = base.span.clone();
        while matches!(self.peek(), Some(Token { tok: Tok::Caret, .. })) {
            self.pos += 1;
            let (k, span) = self.int_literal()?;
            end = span;
            exps.push(k);
        }
        if exps.is_empty() {
            return Ok(base);
        }
        // a^b^c = a^(b^c), folded into one integer exponent
        let mut k = *exps.last().expect("nonempty");
        for &b in exps.iter().rev().skip(1) {
            let folded = (b as f64).powi(k);
            if !(folded.abs() <= i32::MAX as f64) || k < 0 {
                return Err(self.err_at(&end, "exponent tower is not a small integer".into()));
            }
            k = folded as i32;
        }
        let span = base.span.join(&end);
        Ok(Expr {
            kind: ExprKind::Pow(Box::new(base), k),
            span,
        })
    }

    fn int_literal(&mut self) -> Result<(i32, Span), ExprError> {
        let mut sign = 1;
        let mut first: Option<Span> = None;
        if let Some(Token {
            tok: Tok::Minus,
            span,
        }) = self.peek().cloned()
        {
            self.pos += 1;
            sign = -1;
            first = Some(span);
        }
        match self.next() {
            Some(Token {
                tok: Tok::Num(v),
                span,
            }) => {
                if v.fract() != 0.0 || v > i32::MAX as f64 {
                    return Err(self.err_at(&span, format!("exponent must be an integer, found {v}")));
                }
                let span = first.map_or(span.clone(), |f| f.join(&span));
                Ok((sign * v as i32, span))
            }
            Some(t) => Err(self.err_at(
                &t.span,
                format!("expected integer exponent, found {}", describe(&t.tok)),
            )),
            None => Err(self.eof_err("integer exponent")),
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let t = match self.next() {
            Some(t) => t,
            None => return Err(self.eof_err("an operand")),
        };
        match t.tok {
            Tok::Num(v) => Ok(Expr {
                kind: ExprKind::Num(v),
                span: t.span,
            }),
            Tok::LParen => {
                let inner = self.sum()?;
                let close = self.expect(Tok::RParen, "')'")?;
                // parentheses do not create nodes, but the span grows
                Ok(Expr {
                    span: t.span.join(&close),
                    kind: inner.kind,
                })
            }
            Tok::Ident(name) => {
                if matches!(self.peek(), Some(Token { tok: Tok::LParen, .. })) {
                    self.pos += 1;
                    let func = Func::from_name(&name).ok_or_else(|| ExprError::UnknownIdentifier {
                        name: name.clone(),
                        line: t.span.line,
                        col: t.span.col,
                    })?;
                    let mut args = vec![self.sum()?];
                    while matches!(self.peek(), Some(Token { tok: Tok::Comma, .. })) {
                        self.pos += 1;
                        args.push(self.sum()?);
                    }
                    let close = self.expect(Tok::RParen, "')' or ','")?;
                    if args.len() != func.arity() {
                        return Err(ExprError::Arity {
                            name,
                            expected: func.arity(),
                            found: args.len(),
                            line: t.span.line,
                            col: t.span.col,
                        });
                    }
                    return Ok(Expr {
                        kind: ExprKind::Call(func, args),
                        span: t.span.join(&close),
                    });
                }
                let kind = match name.as_str() {
                    "pi" => ExprKind::Pi,
                    "x" => ExprKind::Var(0),
                    "y" => ExprKind::Var(1),
                    "z" => ExprKind::Var(2),
                    _ => match name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                        Some(k) if k >= 1 && !name[1..].starts_with('0') => ExprKind::Var(k - 1),
                        _ => {
                            return Err(ExprError::UnknownIdentifier {
                                name,
                                line: t.span.line,
                                col: t.span.col,
                            })
                        }
                    },
                };
                Ok(Expr { kind, span: t.span })
            }
            other => Err(self.err_at(&t.span, format!("expected an operand, found {}", describe(&other)))),
        }
    }
}
