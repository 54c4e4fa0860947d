import pytest
from hypothesis import given
from hypothesis import strategies as st

from blogfeeds.languages import ISO639_3_CODES, get_languages, primary_subtag


@pytest.mark.parametrize("tag, expected", [
    ("en-US", ["eng"]),
    ("de", ["deu"]),
    ("pt-BR", ["por"]),
    (None, []),
    ("", []),
    ("EN-gb", ["eng"]),
    ("en_US", ["eng"]),
    ("fr-CA", ["fra"]),
    ("zh-Hant-TW", ["zho"]),
    ("gsw", ["gsw"]),
    ("ger", ["deu"]),
    ("xx", []),
    ("qqq", []),
    ("english", []),
    ("x-klingon", []),
])
def test_get_languages(tag, expected):
    assert get_languages(tag) == expected


def test_primary_subtag():
    assert primary_subtag(" EN-us ") == "en"
    assert primary_subtag(None) == ""


def test_table_size():
    from blogfeeds._iso639 import ISO639_1_TO_3

    assert len(ISO639_1_TO_3) == 184
    assert set(ISO639_1_TO_3.values()) <= ISO639_3_CODES


tags = st.one_of(
    st.none(),
    st.text(max_size=12),
    st.builds(lambda a, b: f"{a}-{b}", st.text("abcdefghijklmnopqrstuvwxyzABCDEF", min_size=1, max_size=4),
              st.text("abcdefXYZ0123", max_size=5)),
)


@given(tags)
def test_output_within_table(tag):
    out = get_languages(tag)
    assert len(out) <= 1
    assert set(out) <= ISO639_3_CODES


@given(tags)
def test_depends_only_on_primary_subtag(tag):
    assert get_languages(tag) == get_languages(primary_subtag(tag))
