"""Recursive-descent parser for the Slick concrete syntax.

Grammar::

    policy := rule*
    rule   := atom ("and" atom)* ("if" cond ("and" cond)*)? "."
    cond   := "not"? ( "same" "{" term term+ "}" | "diff" "{" term term+ "}" | atom )
    atom   := term+
    term   := WORD | "(" term* ")"

A bare sequence of two or more terms is a node; a single term stands for
itself. Parentheses always build a node. ``//`` comments run to end of line.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from .safety import SafetyViolation, safety_violations
from .terms import RESERVED, Atom, Cond, Fact, Kind, Policy, Rule, Sign, Var, is_ground, is_variable_name

_PUNCT = "(){}."


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    column: int


class SlickSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class UnsafeRuleError(ValueError):
    def __init__(self, violations: List[SafetyViolation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


def tokenize(text: str) -> List[Token]:
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col = line + 1, 1
            i += 1
        elif ch.isspace():
            i += 1
            col += 1
        elif text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
        elif ch in _PUNCT:
            tokens.append(Token(ch, line, col))
            i += 1
            col += 1
        else:
            start, start_col = i, col
            while i < n and not text[i].isspace() and text[i] not in _PUNCT and not text.startswith("//", i):
                i += 1
                col += 1
            tokens.append(Token(text[start:i], line, start_col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        lines = text.split("\n")
        self.eof = Token("<end of input>", len(lines), len(lines[-1]) + 1)

    def peek(self) -> Token:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else self.eof

    def at(self, text: str) -> bool:
        return self.pos < len(self.tokens) and self.tokens[self.pos].text == text

    def take(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text or self.pos >= len(self.tokens):
            self.fail(f"expected {text!r}, found {tok.text!r}", tok)
        return self.take()

    def fail(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        raise SlickSyntaxError(message, tok.line, tok.column)

    def done(self) -> bool:
        return self.pos >= len(self.tokens)

    def starts_term(self) -> bool:
        if self.done():
            return False
        tok = self.peek().text
        return tok == "(" or (tok not in _PUNCT and tok not in RESERVED)

    def term(self) -> Atom:
        tok = self.peek()
        if tok.text == "(":
            self.take()
            children = []
            while not self.at(")"):
                if not self.starts_term():
                    self.fail(f"unexpected {self.peek().text!r} inside parentheses")
                children.append(self.term())
            self.take()
            return tuple(children)
        if not self.starts_term():
            self.fail(f"expected a term, found {tok.text!r}")
        self.take()
        return Var(tok.text) if is_variable_name(tok.text) else tok.text

    def atom(self) -> Atom:
        if not self.starts_term():
            self.fail(f"expected an atom, found {self.peek().text!r}")
        parts = [self.term()]
        while self.starts_term():
            parts.append(self.term())
        return parts[0] if len(parts) == 1 else tuple(parts)

    def cond(self) -> Cond:
        sign = Sign.POS
        if self.at("not"):
            self.take()
            sign = Sign.NEG
        if self.at("same") or self.at("diff"):
            kw = self.take()
            self.expect("{")
            items = []
            while self.starts_term():
                items.append(self.term())
            self.expect("}")
            if len(items) < 2:
                self.fail(f"'{kw.text}' needs at least two terms", kw)
            return Cond(sign, Kind.SAME if kw.text == "same" else Kind.DIFF, tuple(items))
        return Cond(sign, Kind.TRUE, (self.atom(),))

    def rule_group(self) -> Tuple[List[Atom], Tuple[Cond, ...], Token]:
        first = self.peek()
        heads = [self.atom()]
        while self.at("and"):
            self.take()
            heads.append(self.atom())
        body = []
        if self.at("if"):
            self.take()
            body.append(self.cond())
            while self.at("and"):
                self.take()
                body.append(self.cond())
        self.expect(".")
        return heads, tuple(body), first


def parse_rules(text: str) -> List[Tuple[Rule, int, int]]:
    """Parse without the safety check; returns rules with their source line/column."""
    parser = _Parser(text)
    out = []
    while not parser.done():
        heads, body, tok = parser.rule_group()
        out.extend((Rule(head, body), tok.line, tok.column) for head in heads)
    return out


def parse_policy(text: str) -> Policy:
    """Parse Slick text into a safe :class:`Policy`.

    Raises :class:`SlickSyntaxError` on malformed input and
    :class:`UnsafeRuleError` listing every unsafe rule otherwise.
    """
    located = parse_rules(text)
    violations = []
    for index, (rule, line, column) in enumerate(located):
        violations.extend(safety_violations(rule, index=index, line=line, column=column))
    if violations:
        raise UnsafeRuleError(violations)
    return Policy(tuple(rule for rule, _, _ in located))


def parse_atom(text: str) -> Atom:
    parser = _Parser(text)
    atom = parser.atom()
    if not parser.done():
        parser.fail(f"unexpected {parser.peek().text!r} after atom")
    return atom


def parse_fact(text: str) -> Fact:
    atom = parse_atom(text)
    if not is_ground(atom):
        raise SlickSyntaxError("a fact cannot contain variables", 1, 1)
    return atom
