import pytest

import fracspec as fs


@pytest.fixture(scope="session")
def order075():
    return fs.FractionalOrder(0.75)


@pytest.fixture(scope="session")
def table075(order075):
    return fs.PhaseTable(order075)


@pytest.fixture(scope="session")
def bridge2000(order075):
    # shared by the eigenvalue, eigenfunction and acceptance tests; one
    # m=2000 diagonalization is the most expensive object in the suite
    spec = fs.KernelSpec(order075, fs.KernelKind.BRIDGE)
    return fs.discretize_and_solve(spec, fs.build_grid(2000))


@pytest.fixture(scope="session")
def roots075(order075, table075):
    # refined secular roots for n = 5..20 (acceptance criterion range)
    return {n: fs.refine_rho(n, order075, table075) for n in range(5, 21)}
