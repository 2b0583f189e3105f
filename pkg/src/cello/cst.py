"""Lexing and tolerant structural parsing for C-family sources.

Builds a concrete-syntax view of C++/CUDA/HIP files that is deep enough for
routine-boundary chunking: top-level function, method and class definitions
with exact byte spans, namespace nesting, preprocessor directives, and
comment/string masking. The parser never throws on malformed input; regions
it cannot structure become error nodes, which callers use to decide whether
a file is chunkable at all.

All offsets are byte offsets into the original source. Slices are decoded
only when a human-readable name is needed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

# Token kinds
COMMENT = "comment"
STRING = "string"
CHAR = "char"
NUMBER = "number"
IDENT = "ident"
PREPROC = "preproc"
PUNCT = "punct"

# Node kinds
TRANSLATION_UNIT = "translation_unit"
FUNCTION = "function"
CLASS = "class"
NAMESPACE = "namespace"
LINKAGE = "linkage"
DECLARATION = "declaration"
DIRECTIVE = "directive"
ERROR = "error"

DEFINITION_KINDS = (FUNCTION, CLASS)

# Longest-first so the lexer can take the greedy match.
_MULTI_PUNCT = (
    b"<<=", b">>=", b"->*", b"...",
    b"::", b"->", b"==", b"!=", b"<=", b">=", b"&&", b"||",
    b"<<", b">>", b"+=", b"-=", b"*=", b"/=", b"%=", b"&=", b"|=", b"^=",
    b"++", b"--",
)

_CLASS_KEYWORDS = {b"class", b"struct", b"union", b"enum"}
# Tokens that may legally sit between a parameter list and the body brace.
_BODY_SPECIFIERS = {b"const", b"noexcept", b"override", b"final", b"mutable",
                    b"volatile", b"try", b"throw"}
# A '(' preceded by one of these is not a parameter list.
_NOT_PARAM_HEADS = {b"noexcept", b"decltype", b"alignas", b"throw", b"if",
                    b"while", b"switch", b"for", b"sizeof", b"__declspec",
                    b"__attribute__"}

_BLANK_LINE_RE = re.compile(rb"\n[ \t\r]*\n")


@dataclass(frozen=True)
class Token:
    kind: str
    start: int
    end: int

    def text(self, source: bytes) -> bytes:
        return source[self.start:self.end]


@dataclass
class Node:
    kind: str
    start: int
    end: int
    name: str | None = None
    children: list["Node"] = field(default_factory=list)
    # For FUNCTION/CLASS: byte offsets of the body's '{' and one past its '}'.
    body_start: int | None = None
    body_end: int | None = None


class LexResult:
    """Token stream plus the comment subspans hidden inside directives."""

    def __init__(self, tokens: list[Token], extra_comment_spans: list[tuple[int, int]]):
        self.tokens = tokens
        self.extra_comment_spans = extra_comment_spans


def lex(source: bytes) -> LexResult:
    """Tokenize C-family source bytes. Total: never raises."""
    tokens: list[Token] = []
    extra_comments: list[tuple[int, int]] = []
    n = len(source)
    i = 0
    line_start = True  # only whitespace seen since last newline
    while i < n:
        c = source[i:i + 1]
        if c in (b" ", b"\t", b"\r", b"\f", b"\v"):
            i += 1
            continue
        if c == b"\n":
            line_start = True
            i += 1
            continue
        if c == b"/" and source[i + 1:i + 2] == b"/":
            end = _line_comment_end(source, i)
            tokens.append(Token(COMMENT, i, end))
            i = end
            continue
        if c == b"/" and source[i + 1:i + 2] == b"*":
            end = source.find(b"*/", i + 2)
            end = n if end < 0 else end + 2
            tokens.append(Token(COMMENT, i, end))
            i = end
            continue
        if c == b"#" and line_start:
            i = _lex_directive(source, i, tokens, extra_comments)
            line_start = True
            continue
        line_start = False
        if c == b'"':
            end = _string_end(source, i)
            tokens.append(Token(STRING, i, end))
            i = end
            continue
        if c == b"'":
            end = _char_end(source, i)
            tokens.append(Token(CHAR, i, end))
            i = end
            continue
        if c.isdigit() or (c == b"." and source[i + 1:i + 2].isdigit()):
            end = _number_end(source, i)
            tokens.append(Token(NUMBER, i, end))
            i = end
            continue
        if c.isalpha() or c in (b"_", b"$"):
            end = i + 1
            while end < n and (source[end:end + 1].isalnum() or source[end:end + 1] in (b"_", b"$")):
                end += 1
            # Raw string literal: prefix ending in R glued to a quote.
            if source[end:end + 1] == b'"' and source[i:end].endswith(b"R"):
                send = _raw_string_end(source, end)
                tokens.append(Token(STRING, i, send))
                i = send
                continue
            tokens.append(Token(IDENT, i, end))
            i = end
            continue
        for op in _MULTI_PUNCT:
            if source.startswith(op, i):
                tokens.append(Token(PUNCT, i, i + len(op)))
                i += len(op)
                break
        else:
            tokens.append(Token(PUNCT, i, i + 1))
            i += 1
    return LexResult(tokens, extra_comments)


def _line_comment_end(source: bytes, i: int) -> int:
    n = len(source)
    while True:
        nl = source.find(b"\n", i)
        if nl < 0:
            return n
        j = nl - 1
        if j >= 0 and source[j:j + 1] == b"\r":
            j -= 1
        if j >= 0 and source[j:j + 1] == b"\\":
            i = nl + 1  # spliced line, comment continues
            continue
        return nl


def _string_end(source: bytes, i: int) -> int:
    n = len(source)
    j = i + 1
    while j < n:
        c = source[j:j + 1]
        if c == b"\\":
            j += 2
            continue
        if c == b'"':
            return j + 1
        if c == b"\n":  # unterminated: stop at EOL rather than eating the file
            return j
        j += 1
    return n


def _char_end(source: bytes, i: int) -> int:
    n = len(source)
    j = i + 1
    while j < n:
        c = source[j:j + 1]
        if c == b"\\":
            j += 2
            continue
        if c == b"'":
            return j + 1
        if c == b"\n":
            return j
        j += 1
    return n


def _raw_string_end(source: bytes, quote: int) -> int:
    n = len(source)
    open_paren = source.find(b"(", quote + 1, quote + 20)
    if open_paren < 0:
        return _string_end(source, quote)
    delim = source[quote + 1:open_paren]
    closer = b")" + delim + b'"'
    end = source.find(closer, open_paren + 1)
    return n if end < 0 else end + len(closer)


def _number_end(source: bytes, i: int) -> int:
    # pp-number: digits, letters, dots, digit separators, exponent signs.
    n = len(source)
    j = i + 1
    while j < n:
        c = source[j:j + 1]
        if c.isalnum() or c in (b".", b"_"):
            j += 1
        elif c == b"'" and source[j + 1:j + 2].isalnum():
            j += 2
        elif c in (b"+", b"-") and source[j - 1:j] in (b"e", b"E", b"p", b"P"):
            j += 1
        else:
            break
    return j


def _lex_directive(source: bytes, i: int, tokens: list[Token],
                   extra_comments: list[tuple[int, int]]) -> int:
    """Consume one logical preprocessor line as a PREPROC token.

    Backslash splices extend the line. A // comment terminates the directive
    (emitted separately); /* */ comments are kept inside the token span but
    recorded so masking can blank them.
    """
    n = len(source)
    j = i
    while j < n:
        c = source[j:j + 1]
        if c == b"\n":
            k = j - 1
            if k >= 0 and source[k:k + 1] == b"\r":
                k -= 1
            if k >= 0 and source[k:k + 1] == b"\\":
                j += 1
                continue
            break
        if c == b"/" and source[j + 1:j + 2] == b"/":
            tokens.append(Token(PREPROC, i, j))
            end = _line_comment_end(source, j)
            tokens.append(Token(COMMENT, j, end))
            return end
        if c == b"/" and source[j + 1:j + 2] == b"*":
            cend = source.find(b"*/", j + 2)
            cend = n if cend < 0 else cend + 2
            extra_comments.append((j, cend))
            j = cend
            continue
        if c == b'"':
            j = _string_end(source, j)
            continue
        j += 1
    tokens.append(Token(PREPROC, i, j))
    return j


def masked_source(source: bytes, lexed: LexResult | None = None) -> bytes:
    """Source with comments and string/char literals blanked to spaces.

    Newlines inside masked spans are preserved so line structure survives.
    Preprocessor text stays (pragmas must remain matchable).
    """
    if lexed is None:
        lexed = lex(source)
    buf = bytearray(source)
    spans = [(t.start, t.end) for t in lexed.tokens if t.kind in (COMMENT, STRING, CHAR)]
    spans.extend(lexed.extra_comment_spans)
    for start, end in spans:
        for k in range(start, min(end, len(buf))):
            if buf[k] not in (0x0A, 0x0D):
                buf[k] = 0x20
    return bytes(buf)


def significant_tokens(source: bytes) -> list[tuple[str, bytes]]:
    """(kind, text) pairs of all non-comment tokens, for token-stream diffs."""
    out = []
    for t in lex(source).tokens:
        if t.kind != COMMENT:
            out.append((t.kind, t.text(source)))
    return out


def delimiters_balanced(text: bytes) -> bool:
    """True when {}, (), [] balance outside comments and literals."""
    pairs = {b"}": b"{", b")": b"(", b"]": b"["}
    stack: list[bytes] = []
    for t in lex(text).tokens:
        if t.kind != PUNCT:
            continue
        s = t.text(text)
        if s in (b"{", b"(", b"["):
            stack.append(s)
        elif s in pairs:
            if not stack or stack[-1] != pairs[s]:
                return False
            stack.pop()
    return not stack


class ParseResult:
    def __init__(self, root: Node, tokens: list[Token], source: bytes):
        self.root = root
        self.tokens = tokens
        self.source = source

    def definitions(self) -> list[tuple[Node, str | None]]:
        """All function/class definitions with namespace-qualified names.

        Recurses through namespace and linkage scopes but not into class
        bodies (a class is one unit). Ordered by span start.
        """
        out: list[tuple[Node, str | None]] = []

        def walk(node: Node, prefix: list[str]) -> None:
            for child in node.children:
                if child.kind in DEFINITION_KINDS:
                    name = child.name
                    if name is not None and prefix:
                        name = "::".join(prefix + [name])
                    out.append((child, name))
                elif child.kind == NAMESPACE:
                    walk(child, prefix + [child.name] if child.name else prefix)
                elif child.kind == LINKAGE:
                    walk(child, prefix)

        walk(self.root, [])
        out.sort(key=lambda pair: pair[0].start)
        return out

    def top_level_nodes(self) -> list[Node]:
        return self.root.children

    @property
    def error_count(self) -> int:
        count = 0

        def walk(node: Node) -> None:
            nonlocal count
            for child in node.children:
                if child.kind == ERROR:
                    count += 1
                walk(child)

        walk(self.root)
        return count

    def is_unparseable(self) -> bool:
        """True when the top level holds error nodes and nothing structural."""
        kinds = {c.kind for c in self.root.children}
        return ERROR in kinds and not (kinds - {ERROR, DIRECTIVE, COMMENT})


def parse(source: bytes) -> ParseResult:
    """Structural parse. Never raises; malformed regions become ERROR nodes."""
    lexed = lex(source)
    toks = [t for t in lexed.tokens if t.kind != COMMENT]
    parser = _Parser(source, toks)
    root = Node(TRANSLATION_UNIT, 0, len(source))
    root.children = parser.parse_scope(0, len(toks))
    return ParseResult(root, lexed.tokens, source)


class _Parser:
    def __init__(self, source: bytes, toks: list[Token]):
        self.source = source
        self.toks = toks

    def _text(self, tok: Token) -> bytes:
        return self.source[tok.start:tok.end]

    def parse_scope(self, i: int, end: int) -> list[Node]:
        nodes: list[Node] = []
        while i < end:
            tok = self.toks[i]
            if tok.kind == PREPROC:
                nodes.append(Node(DIRECTIVE, tok.start, tok.end))
                i += 1
                continue
            if tok.kind == IDENT:
                word = self._text(tok)
                if word == b"namespace" or (
                    word == b"inline"
                    and i + 1 < end
                    and self.toks[i + 1].kind == IDENT
                    and self._text(self.toks[i + 1]) == b"namespace"
                ):
                    node, i = self._parse_namespace(i, end)
                    nodes.append(node)
                    continue
                if (
                    word == b"extern"
                    and i + 2 < end
                    and self.toks[i + 1].kind == STRING
                    and self.toks[i + 2].kind == PUNCT
                    and self._text(self.toks[i + 2]) == b"{"
                ):
                    node, i = self._parse_linkage(i, end)
                    nodes.append(node)
                    continue
            node, i = self._parse_run(i, end)
            nodes.append(node)
        return nodes

    def _parse_namespace(self, i: int, end: int) -> tuple[Node, int]:
        start = self.toks[i].start
        j = i
        if self._text(self.toks[j]) == b"inline":
            j += 1
        j += 1  # 'namespace'
        name_parts: list[bytes] = []
        while j < end:
            tok = self.toks[j]
            text = self._text(tok)
            if tok.kind == IDENT:
                name_parts.append(text)
                j += 1
            elif tok.kind == PUNCT and text == b"::":
                name_parts.append(text)
                j += 1
            elif tok.kind == PUNCT and text == b"{":
                close = self._match_brace(j, end)
                if close is None:
                    return Node(ERROR, start, self.toks[end - 1].end), end
                name = b"".join(name_parts).decode("utf-8", "replace") or None
                node = Node(NAMESPACE, start, self.toks[close].end, name=name)
                node.children = self.parse_scope(j + 1, close)
                return node, close + 1
            elif tok.kind == PUNCT and text in (b"=", b";"):
                # namespace alias or weirdness: consume to ';'
                while j < end and not (
                    self.toks[j].kind == PUNCT and self._text(self.toks[j]) == b";"
                ):
                    j += 1
                stop = self.toks[j].end if j < end else self.toks[end - 1].end
                return Node(DECLARATION, start, stop), min(j + 1, end)
            else:
                break
        return Node(ERROR, start, self.toks[min(j, end - 1)].end), min(j + 1, end)

    def _parse_linkage(self, i: int, end: int) -> tuple[Node, int]:
        start = self.toks[i].start
        open_idx = i + 2
        close = self._match_brace(open_idx, end)
        if close is None:
            return Node(ERROR, start, self.toks[end - 1].end), end
        node = Node(LINKAGE, start, self.toks[close].end)
        node.children = self.parse_scope(open_idx + 1, close)
        return node, close + 1

    def _match_brace(self, open_idx: int, end: int) -> int | None:
        depth = 0
        for k in range(open_idx, end):
            tok = self.toks[k]
            if tok.kind != PUNCT:
                continue
            text = self._text(tok)
            if text == b"{":
                depth += 1
            elif text == b"}":
                depth -= 1
                if depth == 0:
                    return k
        return None

    def _parse_run(self, i: int, end: int) -> tuple[Node, int]:
        """Parse one declaration-or-definition starting at token i."""
        toks = self.toks
        start = toks[i].start
        paren = 0
        bracket = 0
        seen_eq = False
        saw_params = False
        saw_arrow = False
        saw_class_kw = False
        paren_groups: list[int] = []
        prev: Token | None = None
        j = i
        last_end = toks[i].end
        while j < end:
            tok = toks[j]
            if tok.kind == PREPROC:
                last_end = tok.end
                j += 1
                continue
            text = self._text(tok)
            if tok.kind == IDENT and text in _CLASS_KEYWORDS and paren == 0 and bracket == 0:
                saw_class_kw = True
            if tok.kind == PUNCT:
                if text == b"(":
                    if paren == 0 and bracket == 0:
                        paren_groups.append(j)
                    paren += 1
                elif text == b")":
                    paren = max(paren - 1, 0)
                    if paren == 0 and bracket == 0 and not seen_eq:
                        saw_params = True
                        ctor = self._try_ctor_tail(i, start, j + 1, end)
                        if ctor is not None:
                            return ctor
                elif text == b"[":
                    bracket += 1
                elif text == b"]":
                    bracket = max(bracket - 1, 0)
                elif text == b"=" and paren == 0 and bracket == 0:
                    if not (prev is not None and prev.kind == IDENT
                            and self._text(prev) == b"operator"):
                        seen_eq = True
                elif text == b"->" and paren == 0 and bracket == 0 and saw_params:
                    saw_arrow = True
                elif text == b";" and paren == 0 and bracket == 0:
                    return Node(DECLARATION, start, tok.end), j + 1
                elif text == b"{" and paren == 0 and bracket == 0:
                    if seen_eq:
                        close = self._match_brace(j, end)
                        if close is None:
                            return Node(ERROR, start, toks[end - 1].end), end
                        prev = toks[close]
                        last_end = toks[close].end
                        j = close + 1
                        continue
                    if self._is_function_body(prev, saw_params, saw_arrow):
                        close = self._match_brace(j, end)
                        if close is None:
                            return Node(ERROR, start, toks[end - 1].end), end
                        name = self._function_name(i, j, paren_groups)
                        node = Node(FUNCTION, start, toks[close].end, name=name,
                                    body_start=tok.start, body_end=toks[close].end)
                        return node, close + 1
                    if saw_class_kw:
                        return self._finish_class(i, start, j, end)
                    close = self._match_brace(j, end)
                    if close is None:
                        return Node(ERROR, start, toks[end - 1].end), end
                    prev = toks[close]
                    last_end = toks[close].end
                    j = close + 1
                    continue
            prev = tok
            last_end = tok.end
            j += 1
        return Node(DECLARATION, start, last_end), end

    def _is_function_body(self, prev: Token | None, saw_params: bool,
                          saw_arrow: bool) -> bool:
        if prev is None:
            return False
        text = self._text(prev)
        if prev.kind == PUNCT and text == b")":
            return True
        if not saw_params:
            return False
        if prev.kind == IDENT and text in _BODY_SPECIFIERS:
            return True
        if prev.kind == PUNCT and text in (b"&", b"&&"):
            return True
        if saw_arrow:  # trailing return type: '-> T {'
            return True
        return False

    def _try_ctor_tail(self, run_start: int, start_byte: int, k: int,
                       end: int) -> tuple[Node, int] | None:
        """Recognize ') [try] : member(init), ... {body}' constructor tails."""
        toks = self.toks
        if k < end and toks[k].kind == IDENT and self._text(toks[k]) == b"try":
            k += 1
        if not (k < end and toks[k].kind == PUNCT and self._text(toks[k]) == b":"):
            return None
        params_close = k - 1
        k += 1
        while k < end:
            # member-or-base name, possibly templated; stop at its ( or {
            angle = 0
            while k < end:
                tok = toks[k]
                text = self._text(tok)
                if tok.kind == PUNCT and text == b"<":
                    angle += 1
                elif tok.kind == PUNCT and text == b">":
                    angle = max(angle - 1, 0)
                elif tok.kind == PUNCT and text == b">>":
                    angle = max(angle - 2, 0)
                elif tok.kind == PUNCT and text in (b"(", b"{") and angle == 0:
                    break
                elif tok.kind == PUNCT and text == b";":
                    return None  # not an initializer list after all
                k += 1
            if k >= end:
                return None
            opener = self._text(toks[k])
            close = self._match_group(k, end, opener)
            if close is None:
                return None
            k = close + 1
            if k < end and toks[k].kind == PUNCT and self._text(toks[k]) == b"...":
                k += 1
            if k < end and toks[k].kind == PUNCT and self._text(toks[k]) == b",":
                k += 1
                continue
            if k < end and toks[k].kind == PUNCT and self._text(toks[k]) == b"{":
                body_close = self._match_brace(k, end)
                if body_close is None:
                    return Node(ERROR, start_byte, toks[end - 1].end), end
                groups = [g for g in range(run_start, params_close)
                          if toks[g].kind == PUNCT and self._text(toks[g]) == b"("]
                name = self._function_name(run_start, k, self._top_level_groups(run_start, params_close))
                node = Node(FUNCTION, start_byte, toks[body_close].end, name=name,
                            body_start=toks[k].start, body_end=toks[body_close].end)
                return node, body_close + 1
            return None
        return None

    def _top_level_groups(self, i: int, end: int) -> list[int]:
        groups = []
        paren = 0
        bracket = 0
        for k in range(i, end):
            tok = self.toks[k]
            if tok.kind != PUNCT:
                continue
            text = self._text(tok)
            if text == b"(":
                if paren == 0 and bracket == 0:
                    groups.append(k)
                paren += 1
            elif text == b")":
                paren = max(paren - 1, 0)
            elif text == b"[":
                bracket += 1
            elif text == b"]":
                bracket = max(bracket - 1, 0)
        return groups

    def _match_group(self, open_idx: int, end: int, opener: bytes) -> int | None:
        closer = {b"(": b")", b"{": b"}", b"[": b"]"}[opener]
        depth = 0
        for k in range(open_idx, end):
            tok = self.toks[k]
            if tok.kind != PUNCT:
                continue
            text = self._text(tok)
            if text == opener:
                depth += 1
            elif text == closer:
                depth -= 1
                if depth == 0:
                    return k
        return None

    def _finish_class(self, run_start: int, start_byte: int, open_idx: int,
                      end: int) -> tuple[Node, int]:
        toks = self.toks
        close = self._match_brace(open_idx, end)
        if close is None:
            return Node(ERROR, start_byte, toks[end - 1].end), end
        name = self._class_name(run_start, open_idx)
        body_start = toks[open_idx].start
        body_end = toks[close].end
        k = close + 1
        while k < end:
            tok = toks[k]
            text = self._text(tok)
            if tok.kind == PUNCT and text == b";":
                return Node(CLASS, start_byte, tok.end, name=name,
                            body_start=body_start, body_end=body_end), k + 1
            if tok.kind == PUNCT and text in (b"(", b"{", b"["):
                sub = self._match_group(k, end, text)
                if sub is None:
                    break
                k = sub + 1
                continue
            if tok.kind in (PREPROC,) or (tok.kind == PUNCT and text == b"}"):
                break  # tolerate a missing ';'
            k += 1
        return Node(CLASS, start_byte, toks[close].end, name=name,
                    body_start=body_start, body_end=body_end), close + 1

    def _class_name(self, run_start: int, open_idx: int) -> str | None:
        """Last plain identifier between the class keyword and the body."""
        toks = self.toks
        key_idx = None
        paren = 0
        bracket = 0
        for k in range(run_start, open_idx):
            tok = toks[k]
            text = self._text(tok)
            if tok.kind == PUNCT:
                if text == b"(":
                    paren += 1
                elif text == b")":
                    paren = max(paren - 1, 0)
                elif text == b"[":
                    bracket += 1
                elif text == b"]":
                    bracket = max(bracket - 1, 0)
            elif tok.kind == IDENT and text in _CLASS_KEYWORDS and paren == 0 and bracket == 0:
                key_idx = k
        if key_idx is None:
            return None
        name = None
        depth = 0
        for k in range(key_idx + 1, open_idx):
            tok = toks[k]
            text = self._text(tok)
            if tok.kind == PUNCT:
                if text in (b"(", b"["):
                    depth += 1
                elif text in (b")", b"]"):
                    depth = max(depth - 1, 0)
                elif text == b":" and depth == 0:
                    break
            elif tok.kind == IDENT and depth == 0 and text not in (b"final", b"class", b"struct"):
                name = text
        return name.decode("utf-8", "replace") if name else None

    def _function_name(self, run_start: int, body_idx: int,
                       paren_groups: list[int]) -> str | None:
        """Qualified name of the routine whose parameter list precedes body_idx."""
        toks = self.toks
        candidate = None
        for g in reversed(paren_groups):
            if g >= body_idx:
                continue
            p = g - 1
            if p >= run_start and toks[p].kind == IDENT and self._text(toks[p]) in _NOT_PARAM_HEADS:
                continue
            candidate = g
            break
        if candidate is None:
            return None
        parts: list[bytes] = []
        k = candidate - 1
        if k < run_start:
            return None
        text = self._text(toks[k])
        if toks[k].kind == PUNCT and text == b")" and k - 2 >= run_start \
                and self._text(toks[k - 1]) == b"(" \
                and self._text(toks[k - 2]) == b"operator":
            parts = [b"operator()"]
            k -= 3
        elif toks[k].kind == PUNCT and text == b"]" and k - 2 >= run_start \
                and self._text(toks[k - 1]) == b"[" \
                and self._text(toks[k - 2]) == b"operator":
            parts = [b"operator[]"]
            k -= 3
        elif toks[k].kind == PUNCT and text not in (b">", b"::") and k - 1 >= run_start \
                and toks[k - 1].kind == IDENT and self._text(toks[k - 1]) == b"operator":
            parts = [b"operator" + text]
            k -= 2
        else:
            got, k = self._name_atom(run_start, k)
            if got is None:
                return None
            parts = [got]
        while k >= run_start and toks[k].kind == PUNCT and self._text(toks[k]) == b"::":
            k -= 1
            got, k = self._name_atom(run_start, k)
            if got is None:
                break
            parts.insert(0, got + b"::")
        if k >= run_start and toks[k].kind == IDENT and self._text(toks[k]) == b"operator":
            parts.insert(0, b"operator ")
        return b"".join(parts).decode("utf-8", "replace")

    def _name_atom(self, run_start: int, k: int) -> tuple[bytes | None, int]:
        """One name component scanning backwards: ident, ~ident, or ident<...>."""
        toks = self.toks
        if k < run_start:
            return None, k
        suffix = b""
        text = self._text(toks[k])
        if toks[k].kind == PUNCT and text in (b">", b">>"):
            depth = 2 if text == b">>" else 1
            close_end = toks[k].end
            k -= 1
            while k >= run_start and depth > 0:
                t = self._text(toks[k])
                if toks[k].kind == PUNCT:
                    if t in (b">", b">>"):
                        depth += 2 if t == b">>" else 1
                    elif t == b"<":
                        depth -= 1
                k -= 1
            open_start = toks[k + 1].start
            suffix = self.source[open_start:close_end]
        if k < run_start or toks[k].kind != IDENT:
            return None, k
        name = self._text(toks[k]) + suffix
        k -= 1
        if k >= run_start and toks[k].kind == PUNCT and self._text(toks[k]) == b"~":
            name = b"~" + name
            k -= 1
        return name, k


def statement_boundaries(parse_result: ParseResult, node: Node) -> list[int]:
    """Byte offsets of statement ends at depth 1 inside a definition body.

    These are the admissible split points for oversize-routine chains.
    """
    if node.body_start is None or node.body_end is None:
        return []
    source = parse_result.source
    bounds: list[int] = []
    depth = 0
    for tok in parse_result.tokens:
        if tok.start < node.body_start or tok.end > node.body_end:
            continue
        if tok.kind != PUNCT:
            continue
        text = tok.text(source)
        if text == b"{":
            depth += 1
        elif text == b"}":
            depth -= 1
            if depth == 1:
                bounds.append(tok.end)
        elif text == b";" and depth == 1:
            bounds.append(tok.end)
    return bounds


def leading_trivia_start(parse_result: ParseResult, node_start: int) -> int:
    """Start offset including contiguous comment lines directly above a node.

    A blank line breaks the attachment, mirroring how doc comments bind to
    the definition they precede.
    """
    source = parse_result.source
    start = node_start
    comments = [t for t in parse_result.tokens if t.kind == COMMENT and t.end <= node_start]
    for tok in reversed(comments):
        between = source[tok.end:start]
        if between.strip() != b"":
            break
        if _BLANK_LINE_RE.search(between):
            break
        start = tok.start
    return start
