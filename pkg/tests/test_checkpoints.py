import json

import pytest

from backstep import Checkpoint, CheckpointStore, Runtime
from backstep.checkpoints import AgentStateDoc, parse_checkpoint_id

from conftest import EchoAgent


def make_checkpoint(session="s0", seq=0, queue=None):
    return Checkpoint(
        session_id=session,
        seq=seq,
        agents={"a": AgentStateDoc(agent="a", agent_type="echo", content={"n": seq})},
        queue=queue,
    )


def test_checkpoint_id_is_session_and_seq():
    cp = make_checkpoint("s3", 17)
    assert cp.checkpoint_id == "s3:17"
    assert parse_checkpoint_id("s3:17") == ("s3", 17)


def test_to_dict_carries_schema_version_and_id():
    doc = make_checkpoint("s1", 4).to_dict()
    assert doc["schema_version"] == 1
    assert doc["checkpoint_id"] == "s1:4"
    assert doc["agents"]["a"] == {
        "agent": "a",
        "type": "echo",
        "schema_version": 1,
        "content": {"n": 4},
    }
    assert "queue" not in doc


def test_queue_included_only_when_taken_with_queue():
    doc = make_checkpoint(queue=[{"sender": "user"}]).to_dict()
    assert doc["queue"] == [{"sender": "user"}]


def test_round_trip_through_dict():
    cp = make_checkpoint("s2", 9, queue=[{"sender": "user"}])
    clone = Checkpoint.from_dict(cp.to_dict())
    assert clone.session_id == "s2" and clone.seq == 9
    assert clone.agents["a"].content == {"n": 9}
    assert clone.queue == [{"sender": "user"}]


def test_put_get_has_seqs():
    store = CheckpointStore()
    for seq in (0, 2, 1):
        store.put(make_checkpoint("s0", seq))
    assert store.has("s0", 1)
    assert not store.has("s0", 9)
    assert store.seqs("s0") == [0, 1, 2]
    assert store.get("s0", 2).agents["a"].content == {"n": 2}
    assert store.get("s0", 9) is None
    assert store.get_by_id("s0:1").seq == 1


def test_persistence_layout_and_disk_fallback(tmp_path):
    store = CheckpointStore(persist_dir=tmp_path)
    store.put(make_checkpoint("s0", 3))
    path = tmp_path / "s0" / "3"
    assert path.is_file()
    on_disk = json.loads(path.read_text())
    assert on_disk["checkpoint_id"] == "s0:3"
    assert on_disk["schema_version"] == 1

    # a fresh store over the same directory reads it back
    cold = CheckpointStore(persist_dir=tmp_path)
    assert cold.get("s0", 3).agents["a"].content == {"n": 3}
    assert cold.get_by_id("s0:3") is not None


def test_delete_session_counts(tmp_path):
    store = CheckpointStore(persist_dir=tmp_path)
    for seq in range(4):
        store.put(make_checkpoint("s1", seq))
    store.put(make_checkpoint("s2", 0))
    assert store.delete_session("s1") == 4
    assert store.seqs("s1") == []
    assert not (tmp_path / "s1").exists()
    assert store.has("s2", 0)


def test_gc_prunes_dead_sessions():
    store = CheckpointStore()
    for sid in ("s0", "s1", "s2"):
        store.put(make_checkpoint(sid, 0))
        store.put(make_checkpoint(sid, 1))
    pruned = store.gc(live_sessions={"s0", "s2"})
    assert pruned == 2
    assert store.sessions() == ["s0", "s2"]


def test_runtime_writes_through_persistent_store(tmp_path):
    store = CheckpointStore(persist_dir=tmp_path)
    rt = Runtime(store=store)
    rt.register_agent(EchoAgent("alpha"))
    rt.enqueue("user", "alpha", "task", "x")
    rt.run()
    files = sorted(p.name for p in (tmp_path / "s0").iterdir())
    assert files == ["0", "1"]
