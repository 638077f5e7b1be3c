import pytest
from hypothesis import given, settings, strategies as st

from cascade.errors import ParseError, PragmaPlacementError, UnknownVariableInPragma, UnsupportedIdiom
from cascade.frontend import (BasicType, Literal, Return, Send, SourceMethod, VarRef, VmCall,
                              compile_source, format_method, parse_text, purify, split_bundle)
from cascade.frontend.lexer import Lexer, symbol_id, symbol_name
from cascade.frontend.parser import parse_method
from conftest import equivalence_sources, corpus_path
from cascade.frontend import load_slang_file


def lit(v):
    return Literal(v, "int", str(v))


def kinds(text):
    return [(t.kind, t.text) for t in Lexer(text).tokens()[:-1]]


def test_lexer_keywords_and_assignment():
    assert kinds("x := a at: 1") == [("ident", "x"), ("assign", ":="), ("ident", "a"),
                                     ("keyword", "at:"), ("int", "1")]


def test_lexer_minus_is_binary_after_operand():
    assert kinds("a-1") == [("ident", "a"), ("binary", "-"), ("int", "1")]
    assert kinds("a + -1") == [("ident", "a"), ("binary", "+"), ("int", "-1")]


def test_lexer_radix_and_char_literals():
    toks = Lexer("16rFF $a 2r101").tokens()
    assert [t.value for t in toks[:-1]] == [255, ord("a"), 5]


def test_lexer_skips_comments_and_tracks_lines():
    toks = Lexer('"note"\n  foo').tokens()
    assert toks[0].text == "foo" and (toks[0].line, toks[0].column) == (2, 3)


def test_unterminated_comment_reports_its_start():
    with pytest.raises(ParseError) as err:
        Lexer('x "open').tokens()
    assert (err.value.line, err.value.column) == (1, 3)


def test_symbol_ids_are_stable_and_tagged():
    ident = symbol_id("foo:bar:")
    assert ident & 0b111 == 0b100
    assert symbol_name(ident) == "foo:bar:"
    assert symbol_id("foo:bar:") == ident


def test_keyword_method_pattern():
    m = parse_text("at: i put: v\n\t^ i + v")
    assert m.selector == "at:put:" and m.params == ("i", "v")
    assert m.body == (Return(Send(VarRef("i"), "+", (VarRef("v"),))),)


def test_binary_and_unary_precedence():
    m = parse_text("f\n\t^ 1 + 2 * 3 max: 4 factorial")
    ret = m.body[0].expr
    assert ret.selector == "max:"
    assert ret.receiver == Send(Send(lit(1), "+", (lit(2),)), "*", (lit(3),))
    assert ret.args == (Send(lit(4), "factorial"),)


def test_pragmas_are_metadata_not_statements():
    m = compile_source(SourceMethod("C", None, "f: x\n\t<primitive: #oop>\n\t<var: #x type: #int>\n\t^ x"))
    assert m.is_primitive and m.returns_oop
    assert m.type_of("x") is BasicType.SIGNED_WORD
    assert len(m.body) == 1


def test_pragma_after_statement_is_rejected():
    with pytest.raises(PragmaPlacementError):
        parse_text("f\n\t| a |\n\ta := 1.\n\t<primitive>\n\t^ a")


def test_type_pragma_for_unknown_variable():
    with pytest.raises(UnknownVariableInPragma):
        compile_source(SourceMethod("C", None, "f\n\t<var: #nope type: #int>\n\t^ 1"))


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        parse_text("f\n\t^ (1 + 2")
    assert err.value.line == 2


def test_brace_array_only_as_vm_call_arguments():
    m = parse_text("f: a\n\t^ self callVMFunction: #hashMix withArguments: {a. 2}")
    assert m.body[0].expr == VmCall("hashMix", (VarRef("a"), lit(2)))


def test_purify_rewrites_known_idioms():
    out = purify("f\n\tself cCode: 'printOop(x)'.\n\t^ 0")
    assert "callVMFunction: #printOop withArguments: {x}" in out


def test_purify_rejects_unknown_idiom():
    with pytest.raises(UnsupportedIdiom):
        purify("f\n\tself cCode: 'memcpy(a, b, 4)'")


def test_bundle_headers_carry_patterns():
    methods = split_bundle('"leading comment"\nA>>foo\n\t^ 1\n\nA>>at: i put: v\n\t^ i\n')
    assert [(m.class_name, m.selector) for m in methods] == [("A", "foo"), ("A", "at:put:")]
    assert parse_method(methods[1]).params == ("i", "v")


def test_bundle_error_lines_match_file_lines():
    methods = split_bundle("A>>foo\n\t^ 1\nA>>bar\n\t^ (\n")
    with pytest.raises(ParseError) as err:
        parse_method(methods[1])
    assert err.value.line == 5


def test_indented_shift_is_not_a_header():
    methods = split_bundle("A>>foo: x\n\t| y |\n\ty := x\n\t\t>> 2.\n\t^ y\n")
    assert len(methods) == 1


def test_text_before_first_header_is_rejected():
    with pytest.raises(ParseError):
        split_bundle("stray\nA>>foo\n\t^ 1\n")


@pytest.mark.parametrize("name", ["equivalence.slang", "bench.slang", "recursion/guarded.slang",
                                  "fileplugin/file_plugin.slang"])
def test_printer_round_trip_on_corpus(name):
    for src in load_slang_file(corpus_path(*name.split("/"))):
        m = parse_method(SourceMethod(src.class_name, src.selector, purify(src.source)))
        again = parse_text(format_method(m))
        assert again.structure() == m.structure(), src.selector


_names = st.sampled_from(["a", "b", "c"])
_leaf = st.one_of(_names.map(VarRef), st.integers(-1000, 1000).map(lit))


def _expr(children):
    binary = st.tuples(children, st.sampled_from(["+", "-", "*", "<", "bitAnd:", "max:"]), children)
    return binary.map(lambda t: Send(t[0], t[1], (t[2],)))


@settings(max_examples=200, deadline=None)
@given(st.recursive(_leaf, _expr, max_leaves=12))
def test_printed_expressions_reparse_identically(expr):
    from cascade.frontend.nodes import MethodNode
    m = MethodNode("f:g:h:", ("a", "b", "c"), body=(Return(expr),))
    assert parse_text(format_method(m)).structure() == m.structure()
