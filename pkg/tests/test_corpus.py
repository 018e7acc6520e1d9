import pytest

from affectseq import corpus as cp


def test_preprocess_lowercases_and_splits():
    assert cp.preprocess("Hello, World!") == ["hello", "world"]


def test_preprocess_expands_contractions():
    assert cp.preprocess("It's fine, isn't it?") == ["it", "is", "fine", "is", "not", "it"]
    assert cp.preprocess("won't") == ["will", "not"]


def test_preprocess_drops_numbers_keeps_mixed():
    assert cp.preprocess("room 101 opened at 9.30") == ["room", "opened", "at"]
    assert cp.preprocess("see you 2nite") == ["see", "you", "nite"]


def test_preprocess_strips_shouted_sound_effects():
    assert cp.preprocess("BANG the door shut") == ["the", "door", "shut"]
    # short all-caps words survive (lowercased)
    assert cp.preprocess("I am OK") == ["i", "am", "ok"]


def test_preprocess_quote_handling():
    assert cp.preprocess("'quoted'") == ["quoted"]


def test_read_pairs_rejects_bad_lines(tmp_path):
    p = tmp_path / "pairs.tsv"
    p.write_text("hi\tthere\nno tab here\n")
    with pytest.raises(cp.CorpusError, match=":2:"):
        cp.read_pairs(str(p))


def test_filter_pairs_drops_empty_and_long():
    long = ["w"] * 21
    pairs = [(["a"], ["b"]), ([], ["b"]), (["a"], long), (["a"] * 20, ["b"])]
    kept = cp.filter_pairs(pairs)
    assert kept == [(["a"], ["b"]), (["a"] * 20, ["b"])]


def test_build_vocab_specials_and_ranking():
    pairs = [((["b", "b", "a", "a", "c"]), ["a"])]
    vocab = cp.build_vocab(pairs, 6)
    assert vocab.tokens[:4] == cp.SPECIAL_TOKENS
    # a (3) then b (2); c cut by the limit
    assert vocab.tokens[4:] == ["a", "b"]
    assert vocab.coverage == pytest.approx(5 / 6)
    assert vocab.id_of("c") == cp.UNK
    assert vocab.encode(["a", "c"]) == [4, cp.UNK]
    assert vocab.decode([4, 5]) == ["a", "b"]


def test_build_vocab_tie_break_lexicographic():
    pairs = [((["z", "m", "a"]), ["q"])]
    vocab = cp.build_vocab(pairs, 6)
    assert vocab.tokens[4:] == ["a", "m"]


def test_build_vocab_rejects_tiny_limit():
    with pytest.raises(cp.CorpusError):
        cp.build_vocab([(["a"], ["b"])], 4)
    with pytest.raises(cp.CorpusError, match="empty"):
        cp.build_vocab([], 100)


def test_vocab_save_load_roundtrip(tmp_path):
    vocab = cp.build_vocab([((["hi", "there"]), ["hi"])], 10)
    path = tmp_path / "vocab.tsv"
    cp.save_vocab(vocab, str(path))
    back = cp.load_vocab(str(path))
    assert back.tokens == vocab.tokens
    assert back.counts == vocab.counts


def test_load_vocab_requires_specials(tmp_path):
    path = tmp_path / "vocab.tsv"
    path.write_text("a\t1\nb\t2\n")
    with pytest.raises(cp.CorpusError, match="special"):
        cp.load_vocab(str(path))


def test_pairs_write_read_roundtrip(tmp_path):
    pairs = [(["hi", "there"], ["hello"]), (["a"], ["b", "c"])]
    path = tmp_path / "tok.tsv"
    cp.write_pairs(pairs, str(path))
    assert cp.read_tokenized_pairs(str(path)) == pairs
