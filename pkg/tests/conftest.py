"""Shared fixtures: corpus locations, parsed corpus models and small inline models."""

from pathlib import Path

import pytest

from src.dsl.parser import parse, parse_file

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
ASA = CORPUS / "part_a" / "asa.tm"

RELAY = '''
model "relay" {
  machine link {
    state counter seen = 0
    state table hosts = [{name: "h1"}]
    stage transfer inbound
    stage receive receive
    stage process check {
      incr seen
      when {name: thing.host} in hosts -> link.accepted
      else -> link.rejected
    }
    stage release accepted
    stage transfer outbound
    stage release rejected {
      log "unknown host"
      drop
    }
    flow link.inbound -> link.receive
    flow link.receive -> link.check
    flow link.check -> link.accepted
    flow link.check -> link.rejected
    flow link.accepted -> link.outbound
  }
  machine audit {
    state counter entries = 0
    stage create entry {
      incr entries
    }
  }
  trigger link.rejected -> audit.entry emit alert {host: thing.host}
}
'''

FORGE = '''
model "forge" {
  machine m {
    stage transfer inbound
    stage receive receive
    stage process prep {
      set thing.ready = true
    }
    stage create build
    stage release done
    flow m.inbound -> m.receive
    flow m.receive -> m.prep
    flow m.prep -> m.build
    flow m.build -> m.done
  }
}
'''


@pytest.fixture
def corpus_root():
    return CORPUS


@pytest.fixture
def asa_text():
    return ASA.read_text(encoding="utf-8")


@pytest.fixture
def asa_model():
    return parse_file(ASA)


@pytest.fixture
def relay_model():
    return parse(RELAY)


@pytest.fixture
def forge_model():
    return parse(FORGE)


@pytest.fixture(params=sorted(CORPUS.rglob("*.tm")), ids=lambda p: p.relative_to(CORPUS).as_posix())
def corpus_file(request):
    """Every ``.tm`` file of the corpus."""
    return request.param
