use std::collections::BTreeMap;

use super::ast::{BinOp, Expr, Program, Stmt, StmtId, StmtKind};
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

struct Parser {
    toks: Vec<Token>,
    at: usize,
    next_id: u32,
    lines: BTreeMap<StmtId, usize>,
}

/// Parse source text into a [`Program`] without semantic checks.
pub fn parse_syntax(src: &str) -> Result<Program, ParseError> {
    parse_with_lines(src).map(|(p, _)| p)
}

/// Like [`parse_syntax`], also returning the source line each statement
/// starts on.
pub fn parse_with_lines(src: &str) -> Result<(Program, BTreeMap<StmtId, usize>), ParseError> {
    let mut p = Parser {
        toks: tokenize(src)?,
        at: 0,
        next_id: 1,
        lines: BTreeMap::new(),
    };
    let program = p.program()?;
    Ok((program, p.lines))
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let tok = &self.toks[self.at];
        ParseError {
            line: tok.pos.line,
            col: tok.pos.col,
            message: format!("unexpected {}", tok.tok),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, want: Tok, label: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.advance();
            Ok(())
        } else {
            Err(self.error(&[label]))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(name)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut names = Vec::new();
        if *self.peek() == Tok::Semi {
            return Ok(names);
        }
        names.push(self.ident()?);
        while *self.peek() == Tok::Comma {
            self.advance();
            names.push(self.ident()?);
        }
        Ok(names)
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        self.expect(Tok::Input, "`input`")?;
        let inputs = self.ident_list()?;
        self.expect(Tok::Semi, "`;`")?;
        self.expect(Tok::Output, "`output`")?;
        let outputs = self.ident_list()?;
        self.expect(Tok::Semi, "`;`")?;
        let mut body = Vec::new();
        while *self.peek() != Tok::Eof {
            body.push(self.stmt()?);
        }
        Ok(Program {
            inputs,
            outputs,
            body,
        })
    }

    fn fresh_id(&mut self) -> StmtId {
        let id = StmtId(self.next_id);
        self.next_id += 1;
        self.lines.insert(id, self.toks[self.at].pos.line);
        id
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        match self.peek().clone() {
            Tok::Ident(target) => {
                let id = self.fresh_id();
                self.advance();
                self.expect(Tok::Assign, "`:=`")?;
                let rhs = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(Stmt {
                    id,
                    kind: StmtKind::Assign { target, rhs },
                })
            }
            Tok::If => {
                let id = self.fresh_id();
                self.advance();
                let cond = self.paren_cond()?;
                let then_block = self.block()?;
                let else_block = if *self.peek() == Tok::Else {
                    self.advance();
                    self.block()?
                } else {
                    Vec::new()
                };
                Ok(Stmt {
                    id,
                    kind: StmtKind::If {
                        cond,
                        then_block,
                        else_block,
                    },
                })
            }
            Tok::While => {
                let id = self.fresh_id();
                self.advance();
                let cond = self.paren_cond()?;
                let body = self.block()?;
                Ok(Stmt {
                    id,
                    kind: StmtKind::While { cond, body },
                })
            }
            _ => Err(self.error(&["identifier", "`if`", "`while`"])),
        }
    }

    fn paren_cond(&mut self) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let e = self.expr()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(e)
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut out = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return Err(self.error(&["`}`"]));
            }
            out.push(self.stmt()?);
        }
        self.advance();
        Ok(out)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::And => BinOp::And,
            Tok::Or => BinOp::Or,
            _ => return None,
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.expr_prec(1)
    }

    // precedence climbing, left-associative
    fn expr_prec(&mut self, min: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            if op.precedence() < min {
                break;
            }
            self.advance();
            let rhs = self.expr_prec(op.precedence() + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.advance();
                Ok(Expr::Not(Box::new(self.unary()?)))
            }
            Tok::Minus => {
                self.advance();
                match self.peek().clone() {
                    Tok::Int(n) if n <= i64::MAX as u64 + 1 => {
                        self.advance();
                        Ok(Expr::Int((n as i64).wrapping_neg()))
                    }
                    _ => Err(self.error(&["integer literal"])),
                }
            }
            Tok::Int(n) => {
                if n > i64::MAX as u64 {
                    return Err(self.error(&["integer literal within range"]));
                }
                self.advance();
                Ok(Expr::Int(n as i64))
            }
            Tok::Ident(name) => {
                self.advance();
                Ok(Expr::Var(name))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.error(&["integer literal", "identifier", "`(`", "`not`", "`-`"])),
        }
    }
}
