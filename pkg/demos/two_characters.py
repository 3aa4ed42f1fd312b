"""Walk through the balancing chain of the state {(1,0), (1,1)} step by step."""

from balfilt import PolarisedState
from balfilt.chain import balancing_chain, iterate_projected
from balfilt.exactq import format_rational


def show(v):
    return "(" + ", ".join(format_rational(x) for x in v) + ")"


def main():
    s = PolarisedState(2, ((1, 0), (1, 1)))
    trace = balancing_chain(s)
    for step in trace.steps:
        print(f"step {step.index}: rank {step.state.rank}, characters {list(step.state.characters)}")
        print(f"  balanced filtration {show(step.balanced.intrinsic)} -> {show(step.filtration)} in Z^2")
        if step.lambda_state is not None:
            ls = step.lambda_state
            print(f"  lambda state: characters {list(ls.characters)}, polarisation {show(ls.polarisation)}")
            print(f"  face killed by the slice: {list(step.face)}")
    print("iterated balanced filtration:", [show(v) for v in trace.sequence])
    # the projection algorithm gets there without slicing
    print("projection algorithm:       ", [show(v) for v in iterate_projected(s)])


if __name__ == "__main__":
    main()
