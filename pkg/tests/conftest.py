import os
import random
import shutil
from importlib import resources

import pytest

from cascade.frontend import load_slang_file, selector_arity
from cascade.words import SMALLINT_MAX, SMALLINT_MIN, tag

CORPUS = resources.files("cascade") / "corpus"
HAVE_OBJDUMP = shutil.which("objdump") is not None


def corpus_path(*parts):
    return str(CORPUS.joinpath(*parts))


def equivalence_sources():
    return load_slang_file(corpus_path("equivalence.slang"))


def random_args(rng, arity):
    """Tagged arguments: mostly full-range, some small to hit edge branches."""
    out = []
    for _ in range(arity):
        r = rng.random()
        if r < 0.6:
            v = rng.randint(SMALLINT_MIN, SMALLINT_MAX)
        elif r < 0.9:
            v = rng.randint(-40, 40)
        else:
            v = rng.choice([0, 1, -1, SMALLINT_MIN, SMALLINT_MAX, 1 << 31, -(1 << 31)])
        out.append(tag(v))
    return out


def arg_tuples(selector, count, seed):
    rng = random.Random(f"{seed}:{selector}")
    return [random_args(rng, selector_arity(selector)) for _ in range(count)]


def make_vm(**kw):
    from cascade.plugins.files import MemoryFileSystem
    from cascade.runtime.vm import VM
    kw.setdefault("filesystem", MemoryFileSystem())
    kw.setdefault("space_bytes", 1 << 20)
    vm = VM(**kw)
    vm.heap.sink_to_buffer()
    return vm


@pytest.fixture
def vm():
    return make_vm()


@pytest.fixture(scope="session")
def equivalence_vm():
    vm = make_vm()
    selectors = [vm.define(s) for s in equivalence_sources()]
    return vm, selectors


@pytest.fixture(params=["compiled", "python"])
def kernel_kind(request):
    from cascade.runtime import kernel
    if request.param == "compiled":
        try:
            kernel.load("compiled")
        except ImportError:
            pytest.skip("compiled kernel not built")
    return request.param


def pytest_report_header(config):
    from cascade.runtime import kernel
    return [f"cascade kernel: {kernel.KIND}", f"objdump: {'yes' if HAVE_OBJDUMP else 'no'}",
            f"CASCADE_GC_TORTURE={os.environ.get('CASCADE_GC_TORTURE', '')}"]


# acceptance verdicts, one line per criterion, printed after the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
