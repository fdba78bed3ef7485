"""CNF-box-m formula text format.

Parses and prints the s-expression format:

    formula := "(and" WS clause+ ")"
    clause  := "(or" WS literal+ ")"
    literal := atom | "(not" WS atom ")"
    atom    := "A" INT | "(box" WS INT WS clause ")"

The printer uses single spaces and no trailing whitespace.
"""

import re
from dataclasses import dataclass
from typing import List, Optional
import logging

from app.errors import FormulaInvariantError, FormulaSyntaxError
from app.formula import Atom, Box, Clause, Formula, Literal, Prop, canonicalize_clause

logger = logging.getLogger(__name__)


@dataclass
class Token:
    """A lexical token with its source position."""
    kind: str
    value: str
    line: int
    column: int


class FormulaParser:
    """Parser for formula text."""

    # Order matters: keywords before the generic open paren
    TOKEN_PATTERNS = [
        ('OPEN', re.compile(r'\((and|or|not|box)(?=\s)')),
        ('CLOSE', re.compile(r'\)')),
        ('ATOM', re.compile(r'A([1-9][0-9]*)(?=[\s)]|$)')),
        ('INT', re.compile(r'([1-9][0-9]*)(?=[\s)]|$)')),
        ('WS', re.compile(r'\s+')),
    ]

    def __init__(self):
        self.tokens: List[Token] = []
        self.pos = 0

    def parse_formula(self, text: str) -> Formula:
        """
        Parse exactly one formula.

        Args:
            text: Formula text

        Returns:
            Parsed Formula with canonicalized clauses

        Raises:
            FormulaSyntaxError: on grammar violations
            FormulaInvariantError: on repeated atoms or clauses
        """
        formulas = self.parse_formulas(text)
        if len(formulas) != 1:
            raise FormulaSyntaxError(f"expected one formula, found {len(formulas)}", 1, 1)
        return formulas[0]

    def parse_formulas(self, text: str) -> List[Formula]:
        """
        Parse a file holding one or more formulas separated by whitespace.

        Args:
            text: Raw file content

        Returns:
            List of Formula objects
        """
        self.tokens = self._tokenize(text)
        self.pos = 0
        formulas = []
        while self._peek() is not None:
            formulas.append(self._formula())
        if not formulas:
            raise FormulaSyntaxError("no formula found", 1, 1)

        logger.debug(f"Parsed {len(formulas)} formulas")
        return formulas

    def _tokenize(self, text: str) -> List[Token]:
        tokens = []
        index, line, line_start = 0, 1, 0
        while index < len(text):
            for kind, pattern in self.TOKEN_PATTERNS:
                match = pattern.match(text, index)
                if match:
                    break
            else:
                column = index - line_start + 1
                snippet = text[index:index + 12].split('\n')[0]
                raise FormulaSyntaxError(f"unexpected input {snippet!r}", line, column)

            if kind != 'WS':
                value = match.group(1) if match.groups() else match.group(0)
                tokens.append(Token(kind, value, line, index - line_start + 1))
            newlines = match.group(0).count('\n')
            if newlines:
                line += newlines
                line_start = index + match.group(0).rindex('\n') + 1
            index = match.end()
        return tokens

    def _peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self, expected: str) -> Token:
        token = self._peek()
        if token is None:
            last = self.tokens[-1] if self.tokens else Token('', '', 1, 1)
            raise FormulaSyntaxError(f"unexpected end of input, expected {expected}", last.line, last.column)
        self.pos += 1
        return token

    def _expect(self, kind: str, value: Optional[str] = None) -> Token:
        expected = f"'({value}'" if kind == 'OPEN' else kind.lower()
        token = self._next(expected)
        if token.kind != kind or (value is not None and token.value != value):
            raise FormulaSyntaxError(f"expected {expected}, found {token.value!r}", token.line, token.column)
        return token

    def _formula(self) -> Formula:
        start = self._expect('OPEN', 'and')
        clauses = [self._clause()]
        while self._at_open('or'):
            clauses.append(self._clause())
        self._expect('CLOSE')
        try:
            return Formula(tuple(clauses))
        except FormulaInvariantError as e:
            raise type(e)(f"line {start.line}, column {start.column}: {e}") from e

    def _clause(self) -> Clause:
        start = self._expect('OPEN', 'or')
        literals = [self._literal()]
        while not self._at_close():
            literals.append(self._literal())
        self._expect('CLOSE')
        try:
            return canonicalize_clause(literals)
        except FormulaInvariantError as e:
            raise type(e)(f"line {start.line}, column {start.column}: {e}") from e

    def _literal(self) -> Literal:
        if self._at_open('not'):
            self._expect('OPEN', 'not')
            atom = self._atom()
            self._expect('CLOSE')
            return Literal(atom, positive=False)
        return Literal(self._atom(), positive=True)

    def _atom(self) -> Atom:
        token = self._next('atom')
        if token.kind == 'ATOM':
            return Prop(int(token.value))
        if token.kind == 'OPEN' and token.value == 'box':
            index = self._expect('INT')
            body = self._clause()
            self._expect('CLOSE')
            return Box(int(index.value), body)
        raise FormulaSyntaxError(f"expected atom, found {token.value!r}", token.line, token.column)

    def _at_open(self, keyword: str) -> bool:
        token = self._peek()
        return token is not None and token.kind == 'OPEN' and token.value == keyword

    def _at_close(self) -> bool:
        token = self._peek()
        return token is None or token.kind == 'CLOSE'


def parse_formula(text: str) -> Formula:
    return FormulaParser().parse_formula(text)


def parse_formulas(text: str) -> List[Formula]:
    return FormulaParser().parse_formulas(text)


def print_atom(atom: Atom) -> str:
    if isinstance(atom, Prop):
        return f"A{atom.index}"
    return f"(box {atom.box_index} {print_clause(atom.body)})"


def print_literal(literal: Literal) -> str:
    text = print_atom(literal.atom)
    return text if literal.positive else f"(not {text})"


def print_clause(clause: Clause) -> str:
    return "(or " + " ".join(print_literal(lit) for lit in clause.literals) + ")"


def print_formula(f: Formula) -> str:
    """Render a formula in canonical text form (clauses in stored order)."""
    return "(and " + " ".join(print_clause(c) for c in f.clauses) + ")"
