#!/usr/bin/python3
"""Release checks. The package version must match the newest CHANGELOG entry
and the docs version, the branch must be in sync with origin and every
configuration under configs/ must load. If the checks pass and the user
confirms, the version is tagged and pushed.
"""
import glob
import re
import subprocess

import yaml

from nltlab import VERSION
from nltlab.config import SCHEMA_VERSION, ExperimentConfig

allowed_branch = "master"


def git(*args: str) -> str:
    output = subprocess.run(["git", *args], capture_output=True, check=True)
    return output.stdout.decode("utf-8").strip()


def check_branch():
    branch_name = git("branch", "--show-current")
    assert branch_name == allowed_branch, f"Can only tag from '{allowed_branch}'"
    git("fetch")
    behind = git("rev-list", "--count", f"{allowed_branch}..origin/{allowed_branch}")
    assert behind == "0", f"Local branch is behind origin by {behind} commits"
    ahead = git("rev-list", "--count", f"origin/{allowed_branch}..{allowed_branch}")
    assert ahead == "0", f"Local branch is ahead of origin by {ahead} commits"


def check_versions():
    with open("CHANGELOG.md", "r") as stream:
        text = stream.read()
    versions = re.findall(r"\[(?:(\d+\.(?:\d+\.)*\d+))\]", text)
    assert (
        versions and versions[0] == VERSION
    ), f"Version mismatch: package version is {VERSION} but 'CHANGELOG.md' has {versions[:1]}"
    assert "Unreleased" not in text, "Cannot deploy with unreleased changes in 'CHANGELOG.md'"

    with open("mkdocs.yml", "r") as fhandle:
        docs_version = yaml.load(fhandle, Loader=yaml.SafeLoader)["extra"]["version"]
    assert (
        docs_version == VERSION
    ), f"Version mismatch: package version is {VERSION} but 'mkdocs.yml' version is {docs_version}"


def check_configs():
    paths = sorted(glob.glob("configs/*.yml"))
    assert paths, "No configurations found in 'configs/'"
    for path in paths:
        config = ExperimentConfig.from_file(path)
        assert config.schema_version == SCHEMA_VERSION, f"'{path}' has an old schema"
        print(f"Loaded {path} (run id {config.run_id()})")


if __name__ == "__main__":
    check_branch()
    check_versions()
    check_configs()

    confirm_deploy = "OK"
    answer = input(f"Confirm tag & deploy as version '{VERSION}' by typing '{confirm_deploy}': ")
    if answer == confirm_deploy:
        git("tag", "-a", VERSION, "-m", f"Version: {VERSION}")
        git("push", "origin", VERSION)
    else:
        print("Not tagged, not deployed.")
