"""Lexer and structural-parser battery."""

from pathlib import Path

import pytest

from cello import cst

FIXTURE_SOURCES = sorted(
    (Path(__file__).parent / "fixtures" / "minirepo" / "src").rglob("*.*"))


def _parse(src: str) -> cst.ParseResult:
    return cst.parse(src.encode())


def _names(src: str) -> list[str]:
    return [name for _, name in _parse(src).definitions()]


class TestLexer:
    def test_comments_strings_chars(self):
        src = b'int a; // line\n/* block */ const char* s = "x\\"y"; char c = \'}\';'
        kinds = [t.kind for t in cst.lex(src).tokens]
        assert kinds.count(cst.COMMENT) == 2
        assert kinds.count(cst.STRING) == 1
        assert kinds.count(cst.CHAR) == 1

    def test_raw_string_swallows_braces(self):
        src = b'const char* s = R"(has { " } inside)"; int x;'
        toks = cst.lex(src).tokens
        strings = [t for t in toks if t.kind == cst.STRING]
        assert len(strings) == 1
        assert b"inside" in strings[0].text(src)

    def test_digit_separator_is_not_char_literal(self):
        src = b"long big = 1'000'000;"
        kinds = [t.kind for t in cst.lex(src).tokens]
        assert cst.CHAR not in kinds
        assert kinds.count(cst.NUMBER) == 1

    def test_directive_is_one_token_with_continuation(self):
        src = b"#define ADD(a, b) \\\n  ((a) + (b))\nint x;"
        preproc = [t for t in cst.lex(src).tokens if t.kind == cst.PREPROC]
        assert len(preproc) == 1
        assert b"((a) + (b))" in preproc[0].text(src)

    def test_line_comment_inside_directive_is_separate(self):
        src = b"#pragma omp target // old __global__ note\nint x;"
        lexed = cst.lex(src)
        comment = next(t for t in lexed.tokens if t.kind == cst.COMMENT)
        assert b"__global__" in comment.text(src)
        masked = cst.masked_source(src, lexed)
        assert b"pragma omp target" in masked
        assert b"__global__" not in masked

    def test_masking_preserves_length_and_newlines(self):
        src = b'void f() {\n  // c1\n  const char* s = "a\nb";\n}'
        masked = cst.masked_source(src)
        assert len(masked) == len(src)
        assert masked.count(b"\n") == src.count(b"\n")


class TestParser:
    def test_simple_function(self):
        assert _names("int add(int a, int b) { return a + b; }") == ["add"]

    def test_qualified_method_and_namespace(self):
        src = """
        namespace outer { namespace inner {
        int Widget::size() const { return n_; }
        }}
        """
        assert _names(src) == ["outer::inner::Widget::size"]

    def test_constructor_with_member_init_braces(self):
        src = "Grid::Grid(int n) : rows_(n), cols_{n}, data_() { fill(); }"
        assert _names(src) == ["Grid::Grid"]

    def test_destructor(self):
        assert _names("Grid::~Grid() { release(); }") == ["Grid::~Grid"]

    def test_operator_overloads(self):
        src = """
        bool operator==(P a, P b) { return a.x == b.x; }
        P& P::operator+=(P o) { x += o.x; return *this; }
        int Functor::operator()(int v) const { return v; }
        """
        assert _names(src) == ["operator==", "P::operator+=",
                               "Functor::operator()"]

    def test_templates(self):
        src = """
        template <typename T>
        T max_of(T a, T b) { return a > b ? a : b; }
        template <class T> struct Holder { T value; };
        void Box<int>::reset() { value = 0; }
        """
        assert _names(src) == ["max_of", "Holder", "Box<int>::reset"]

    def test_class_struct_enum(self):
        src = """
        class Alpha : public Base { int x; };
        struct Beta { double y; } instance;
        enum class Gamma : int { A, B };
        """
        parsed = _parse(src)
        assert [(n.kind, name) for n, name in parsed.definitions()] == [
            (cst.CLASS, "Alpha"), (cst.CLASS, "Beta"), (cst.CLASS, "Gamma")]

    def test_initializers_are_not_definitions(self):
        src = """
        static const int kTable[] = {1, 2, 3};
        auto fn = [](int v) { return v; };
        int braced { 5 };
        Config cfg(1, 2);
        """
        assert _parse(src).definitions() == []

    def test_extern_c_block_and_inline_function(self):
        src = 'extern "C" { void c_api(void) { } }\nextern "C" void other(void) { }'
        assert _names(src) == ["c_api", "other"]

    def test_trailing_return_type(self):
        src = "auto make() -> std::vector<int> { return {}; }"
        assert _names(src) == ["make"]

    def test_function_try_block_tolerated(self):
        src = "int risky() try { return 1; } catch (...) { return 0; }"
        parsed = _parse(src)
        assert parsed.error_count == 0
        assert "risky" in [n for n in _names(src) if n]

    def test_unbalanced_braces_is_unparseable(self):
        parsed = _parse("void broken() { if (x) {")
        assert parsed.is_unparseable()

    def test_prose_is_not_unparseable(self):
        parsed = _parse("This file is plain English prose, not code at all.")
        assert not parsed.is_unparseable()
        assert parsed.definitions() == []

    def test_preproc_conditionals_kept_as_written(self):
        src = """
        #ifdef USE_GPU
        __global__ void gpu_path() { }
        #else
        void cpu_path() { }
        #endif
        """
        assert _names(src) == ["gpu_path", "cpu_path"]


class TestReparseProperty:
    @pytest.mark.parametrize("path", [p for p in FIXTURE_SOURCES], ids=lambda p: p.name)
    def test_each_definition_reparses_cleanly(self, path):
        source = path.read_bytes()
        parsed = cst.parse(source)
        assert parsed.error_count == 0
        for node, name in parsed.definitions():
            again = cst.parse(source[node.start:node.end])
            assert again.error_count == 0
            kinds = [c.kind for c in again.top_level_nodes()]
            assert kinds and kinds[0] in cst.DEFINITION_KINDS

    def test_statement_boundaries_inside_body(self):
        src = b"void f() { a(); if (x) { b(); } c(); }"
        parsed = cst.parse(src)
        node = parsed.definitions()[0][0]
        bounds = cst.statement_boundaries(parsed, node)
        assert bounds == sorted(bounds)
        assert all(node.body_start < b <= node.body_end for b in bounds)
        assert len(bounds) == 3  # a(); | } of if | c();

    def test_leading_trivia_attachment(self):
        src = b"int before;\n\n// doc line 1\n// doc line 2\nvoid f() { }\n"
        parsed = cst.parse(src)
        node = parsed.definitions()[0][0]
        start = cst.leading_trivia_start(parsed, node.start)
        assert src[start:].startswith(b"// doc line 1")

    def test_blank_line_breaks_trivia(self):
        src = b"// stale comment\n\nvoid f() { }\n"
        parsed = cst.parse(src)
        node = parsed.definitions()[0][0]
        assert cst.leading_trivia_start(parsed, node.start) == node.start


def test_significant_tokens_ignore_comments():
    a = b"int f() { return 1; } // tail"
    b_src = b"/* head */ int f() { /* mid */ return 1; }"
    assert cst.significant_tokens(a) == cst.significant_tokens(b_src)


def test_delimiters_balanced_respects_literals():
    assert cst.delimiters_balanced(b"void f() { char c = '{'; }")
    assert not cst.delimiters_balanced(b"void f() { (")
    assert cst.delimiters_balanced(b'auto s = "unmatched } in string {{";')
