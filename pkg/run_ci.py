#!/usr/bin/python3
"""Run the test suites, the operator verification and the example
configurations in sequence. Outputs go to $NLTLAB_OUTPUT_DIR (default
`ci-runs`)."""
import logging
import os
import subprocess

logging.basicConfig(level=logging.INFO)

os.environ.setdefault("NLTLAB_OUTPUT_DIR", "ci-runs")

steps = [
    "coverage run -m pytest",
    "coverage html -d htmlcov",
    "mypy nltlab",
    "black --check nltlab tests",
    "python -m nltlab verify-ops --level quick",
    "python -m nltlab simulate --config configs/constant.yml",
    "python -m nltlab simulate --config configs/model1_identities.yml",
    "python -m nltlab simulate --config configs/model1_besov.yml",
    "python -m nltlab simulate --config configs/model1_weak_form.yml",
    "python -m nltlab simulate --config configs/model2_regime.yml",
    "python -m nltlab simulate --config configs/model3_global.yml",
    "python -m nltlab sweep --config configs/model3_regime_sweep.yml",
    "python -m nltlab vanishing-viscosity --config configs/vanishing_viscosity.yml",
    "python -m nltlab verify-ops --level full",
    "pytest -m slow",
]

# blowup-study exits with the blow-up code on success
expected = {"python -m nltlab blowup-study --config configs/model1_blowup.yml": 3}

nsteps = len(steps) + len(expected)
for istep, step in enumerate(steps, 1):
    logging.info(f"Running step {istep} of {nsteps}: {step}")
    subprocess.run(step, shell=True, check=True)

for istep, (step, code) in enumerate(expected.items(), len(steps) + 1):
    logging.info(f"Running step {istep} of {nsteps}: {step}")
    returncode = subprocess.run(step, shell=True).returncode
    assert returncode == code, f"'{step}' exited with {returncode}, expected {code}"
