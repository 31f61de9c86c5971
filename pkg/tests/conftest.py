import sys
import json

import pytest


def write_tsv(path, rows, header=("text_id", "text", "task_1")):
    lines = ["\t".join(header)] + ["\t".join(r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def dataset_to_tsv(path, data):
    return write_tsv(path, [(p.id, p.text, p.label.value) for p in data])


@pytest.fixture
def tiny_tsv(tmp_path):
    return write_tsv(
        tmp_path / "tiny.tsv",
        [("t1", "you are fine", "NOT"), ("t2", "you are awful", "HOF"), ("t3", "nice day", "NOT")],
    )


@pytest.fixture
def figure1_json(tmp_path):
    doc = [
        {
            "id": "p1",
            "text": "hateful parent tweet",
            "label": "HOF",
            "comments": [
                {"id": "c1", "text": "Amine", "label": "HOF", "comments": []},
                {"id": "c2", "text": "Amine", "label": "HOF"},
            ],
        }
    ]
    path = tmp_path / "conv.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
