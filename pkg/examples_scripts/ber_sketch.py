"""Quick BER comparison of the block code and its two unwrapped versions.

Small frame budgets, so the numbers are rough; raise MAX_FRAMES for curves
worth plotting.
"""
from ldpcconv import codes
from ldpcconv.sim import SimConfig, run_ber

SNRS = (1.5, 2.0, 2.5)
MAX_FRAMES = 300


def main():
    runs = [
        ("block", codes.tanner_qc_matrix(31), "block", 8 * MAX_FRAMES),
        ("time-invariant", codes.tanner_time_invariant(), "pipeline", MAX_FRAMES // 10),
        ("time-varying", codes.tanner_time_varying(31), "pipeline", MAX_FRAMES // 10),
    ]
    for name, code, decoder, frames in runs:
        cfg = SimConfig(code, SNRS, seed=1, decoder=decoder, iterations=50, max_frames=frames,
                        min_bit_errors=200, min_frame_errors=10, code_id=name)
        for p in run_ber(cfg).points:
            print(f"{name:<16} {p.ebn0_db:4.1f} dB  BER {p.ber:.2e}  ({p.bit_errors} errors in {p.bits} bits)")


if __name__ == "__main__":
    main()
