from bispec.cnlbi import KEYWORDS
from bispec.lexer import TokenKind, tokenize


def kinds(tokens):
    return [t.kind for t in tokens]


def test_fixed_fragments_lex_as_keywords():
    tokens, diags = tokenize("DataEntity Patient is a Master Dimension", KEYWORDS)
    assert not diags
    assert [t.text for t in tokens[:-1]] == ["DataEntity", "Patient", "is", "a", "Master", "Dimension"]
    assert kinds(tokens) == [
        TokenKind.KEYWORD,
        TokenKind.IDENT,
        TokenKind.KEYWORD,
        TokenKind.KEYWORD,
        TokenKind.KEYWORD,
        TokenKind.KEYWORD,
        TokenKind.EOF,
    ]


def test_empty_input_is_just_eof():
    tokens, diags = tokenize("", KEYWORDS)
    assert kinds(tokens) == [TokenKind.EOF]
    assert diags == []


def test_attribute_line_token_shapes():
    tokens, diags = tokenize('name is a String (NotNull),', KEYWORDS)
    assert not diags
    assert kinds(tokens)[:-1] == [
        TokenKind.IDENT,   # attribute ids are not fixed fragments
        TokenKind.KEYWORD,
        TokenKind.KEYWORD,
        TokenKind.KEYWORD,
        TokenKind.PUNCT,
        TokenKind.KEYWORD,
        TokenKind.PUNCT,
        TokenKind.PUNCT,
    ]


def test_hyphenated_words_stay_single_tokens():
    tokens, _ = tokenize("Roll-up x-axis a - b", KEYWORDS)
    texts = [t.text for t in tokens[:-1]]
    assert texts == ["Roll-up", "x-axis", "a", "-", "b"]


def test_apostrophes_in_prose_words():
    tokens, diags = tokenize("per institution's city", KEYWORDS)
    assert not diags
    assert [t.text for t in tokens[:-1]] == ["per", "institution's", "city"]


def test_spans_cover_their_text():
    source = 'DataEntity X is a Master\n  "quoted name" 42'
    tokens, _ = tokenize(source, KEYWORDS)
    for token in tokens[:-1]:
        assert token.span.slice(source) == token.text


def test_unterminated_string_reports_cnl001():
    tokens, diags = tokenize('Actor X "unclosed', KEYWORDS)
    assert any(d.code == "CNL001" for d in diags)


def test_invalid_character_reports_cnl002():
    _, diags = tokenize("entity @ here", KEYWORDS, code_prefix="CNL")
    assert [d.code for d in diags] == ["CNL002"]


def test_comments_become_comment_tokens():
    tokens, _ = tokenize("// leading note\nActor X", KEYWORDS)
    assert tokens[0].kind is TokenKind.COMMENT
    assert tokens[0].text == "// leading note"


def test_block_comments_only_when_enabled():
    tokens, diags = tokenize("/* note */ Actor", KEYWORDS, block_comments=True)
    assert tokens[0].kind is TokenKind.COMMENT
    assert not diags
    tokens, _ = tokenize("/* note */", KEYWORDS, block_comments=False)
    assert tokens[0].kind is TokenKind.PUNCT  # plain '/' token; the parser rejects it


def test_line_and_column_positions():
    source = "Actor A\n  is a User"
    tokens, _ = tokenize(source, KEYWORDS)
    is_tok = [t for t in tokens if t.text == "is"][0]
    assert (is_tok.span.line, is_tok.span.col) == (2, 3)
