"""Design calculations for a two-step photoionization source for Ca⁺ ion traps.

Modules: quantities, qpm_shg, beam_optics, led_model, ion_physics,
quantum_jumps, config, report and cli.
"""
__version__ = "0.1.0"
