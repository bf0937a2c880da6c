"""False-data-injection attack simulation for a shipboard power system.

Synchronous generators with governor and exciter control feed a shared DC
link through dq-controlled converters.  The package simulates the coupled
dynamics under measurement attacks and faults, solves the rotor response in
closed form, and evaluates frequency, ROCOF and DC-voltage relays.
"""
__version__ = "0.1.0"

from .analytic import (Case, CaseSteadyState, LambdaCoefficients, TransientSolution, attack_coefficients,
                       case_steady_state, dc_attack_increment, delta_omega_closed_form, lambda_coefficients,
                       omega_from_vdc, piecewise_rotor_response, theta_closed_form, transient_solution,
                       voltage_attack_coefficients)
from .attacks import (AttackSpec, MeasurementSet, Target, TimeVaryingTerm, apply_fdia, check_overlaps,
                      corrupted_measurements)
from .dynamics import (FaultSpec, FaultView, IntegratorConfig, TimeSeries, find_equilibrium, inject_fault,
                       simulate, state_at, state_derivative)
from .errors import (DegenerateEigenvalue, DimensionError, InsufficientSamples, InvalidVoltage, MissingColumn,
                     NoConvergence, NonfiniteState, NonpositiveVdc, OverlappingAttacks, ParseError, SpsError,
                     UnstableAmplification, ValidationError)
from .model import (ConverterParams, GeneratorParams, NetworkModel, PowerSystemModel, SystemState,
                    default_model, derived_inputs, electrical_power, validate_model)
from .protection import (Alarm, AlarmEvent, PhasePortrait, Relay, RelayConfig, TripEvent, classify_portrait,
                         evaluate_alarms, evaluate_relays, phase_portrait, rocof_estimate, rolling_rocof)
from .runner import (RunReport, analytic_overlay, emit_omega_theta_portrait, fixture_names, fixture_path, run,
                     run_analytic, run_file, sweep)
from .scenario import InitialCondition, Scenario, load_scenario, parse_scenario, serialize, with_parameter
