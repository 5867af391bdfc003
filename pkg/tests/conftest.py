import pytest

from cskct.channel import ChannelParams, Topology, build_cir_table


@pytest.fixture(scope="session")
def params():
    return ChannelParams()


@pytest.fixture(scope="session")
def table_17(params):
    return build_cir_table(params, Topology.from_d_bar(11.5))


@pytest.fixture(scope="session")
def table_19(params):
    return build_cir_table(params, Topology.from_d_bar(12.5))


@pytest.fixture(scope="session")
def table_17_no_isi(params):
    return build_cir_table(params, Topology.from_d_bar(11.5, isi_memory=0))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
