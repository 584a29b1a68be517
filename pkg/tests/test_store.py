import struct
import threading
import zlib

import pytest

from recipelab import store as st


@pytest.fixture
def store(tmp_path):
    s = st.GenerationStore(tmp_path / "gen.log")
    yield s
    s.close()


def _save(store, n=1, **overrides):
    out = []
    for i in range(n):
        kwargs = dict(
            mode="instructions",
            context={"title": f"Dish {i}", "ingredients": "salt\npepper"},
            output=f"Step one {i}. Step two.",
            sampling={"k": 3, "seed": 42 + i, "max_new_tokens": 384},
            report={"bleu": 0.5, "nted": 0.2},
            reference_id="r0001",
        )
        kwargs.update(overrides)
        out.append(store.save_generation(**kwargs))
    return out


class TestSaveGetList:
    def test_round_trip_exact(self, store):
        saved = _save(store)[0]
        assert store.get(saved.id) == saved

    def test_unknown_id(self, store):
        with pytest.raises(st.NotFound):
            store.get(999)

    def test_ids_strictly_increase(self, store):
        ids = [g.id for g in _save(store, n=5)]
        assert ids == sorted(ids)
        assert len(set(ids)) == 5

    def test_pagination(self, store):
        _save(store, n=25)
        page_sizes = []
        for page in (1, 2, 3):
            items, total = store.list(page=page, page_size=10)
            assert total == 25
            page_sizes.append(len(items))
        assert page_sizes == [10, 10, 5]

    def test_list_newest_first(self, store):
        saved = _save(store, n=3)
        items, _ = store.list()
        assert [g.id for g in items] == [saved[2].id, saved[1].id, saved[0].id]


class TestAnnotations:
    def test_rating_stored(self, store):
        gen = _save(store)[0]
        rating = store.add_rating(gen.id, 5)
        assert rating.value == 5
        assert store.ratings(gen.id) == [rating]

    def test_rating_bounds(self, store):
        gen = _save(store)[0]
        for bad in (0, 6, -1):
            with pytest.raises(st.OutOfRange):
                store.add_rating(gen.id, bad)

    def test_rating_unknown_generation(self, store):
        with pytest.raises(st.NotFound):
            store.add_rating(12345, 3)

    def test_comment_stored(self, store):
        gen = _save(store)[0]
        comment = store.add_comment(gen.id, "tasty but salty")
        assert store.comments(gen.id) == [comment]

    def test_empty_comment(self, store):
        gen = _save(store)[0]
        with pytest.raises(st.EmptyComment):
            store.add_comment(gen.id, "   ")

    def test_comment_too_long(self, store):
        gen = _save(store)[0]
        with pytest.raises(st.CommentTooLong):
            store.add_comment(gen.id, "x" * 4001)


class TestDurability:
    def test_restart_preserves_everything(self, tmp_path):
        path = tmp_path / "gen.log"
        s1 = st.GenerationStore(path)
        gen = _save(s1, n=3)[1]
        s1.add_rating(gen.id, 4)
        s1.add_comment(gen.id, "needs more garlic")
        s1.close()

        s2 = st.GenerationStore(path)
        assert s2.get(gen.id) == gen
        assert [r.value for r in s2.ratings(gen.id)] == [4]
        assert [c.text for c in s2.comments(gen.id)] == ["needs more garlic"]
        _, total = s2.list()
        assert total == 3
        # ids keep increasing after restart
        new = _save(s2)[0]
        assert new.id == 4
        s2.close()

    def test_torn_tail_truncated(self, tmp_path):
        path = tmp_path / "gen.log"
        s1 = st.GenerationStore(path)
        _save(s1, n=2)
        s1.close()
        with open(path, "ab") as fh:
            fh.write(struct.pack(">I", 500) + b"onlypartofthepayload")
        s2 = st.GenerationStore(path)
        _, total = s2.list()
        assert total == 2
        third = _save(s2)[0]
        assert third.id == 3
        s2.close()
        s3 = st.GenerationStore(path)
        assert s3.get(3) == third
        s3.close()

    def test_corrupt_checksum_truncated(self, tmp_path):
        path = tmp_path / "gen.log"
        s1 = st.GenerationStore(path)
        _save(s1, n=1)
        s1.close()
        body = b'{"type": "generation", "id": 2}'
        with open(path, "ab") as fh:
            fh.write(struct.pack(">I", len(body)) + body
                     + struct.pack(">I", zlib.crc32(body) ^ 0xFF))
        s2 = st.GenerationStore(path)
        _, total = s2.list()
        assert total == 1
        s2.close()

    def test_frame_format_readable_externally(self, tmp_path):
        import json

        path = tmp_path / "gen.log"
        s = st.GenerationStore(path)
        _save(s, n=2)
        s.add_rating(1, 3)
        s.close()
        frames = []
        data = path.read_bytes()
        pos = 0
        while pos < len(data):
            (length,) = struct.unpack_from(">I", data, pos)
            payload = data[pos + 4 : pos + 4 + length]
            (crc,) = struct.unpack_from(">I", data, pos + 4 + length)
            assert zlib.crc32(payload) == crc
            frames.append(json.loads(payload))
            pos += 4 + length + 4
        assert [f["type"] for f in frames] == ["generation", "generation", "rating"]


class TestConcurrentWrites:
    def test_ids_unique_under_threads(self, tmp_path):
        s = st.GenerationStore(tmp_path / "gen.log")
        ids = []
        lock = threading.Lock()

        def worker():
            for _ in range(20):
                gen = _save(s)[0]
                with lock:
                    ids.append(gen.id)

        threads = [threading.Thread(target=worker) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(ids) == 80
        assert len(set(ids)) == 80
        s.close()
