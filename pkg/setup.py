#!/usr/bin/env python3
"""
Setup script for spexlab

Checks the interpreter, installs dependencies, creates a personal config and
runs a quick smoke test of the command line.
"""

import os
import sys
import subprocess
import shutil
from pathlib import Path

MIN_PYTHON = (3, 8)
REQUIREMENT_FILES = {"full": "requirements.txt", "minimal": "requirements-minimal.txt"}


def check_python_version():
    """numpy and scipy wheels need a reasonably recent interpreter."""
    found = ".".join(map(str, sys.version_info[:3]))
    if sys.version_info < MIN_PYTHON:
        print(f"❌ spexlab needs Python {'.'.join(map(str, MIN_PYTHON))}+, found {found}")
        return False
    print(f"✅ Python {found}")
    return True


def install_requirements(flavour="full"):
    """pip-install a requirements file; a failed full install retries the minimal one."""
    req_file = REQUIREMENT_FILES[flavour]
    print(f"\n📦 pip install -r {req_file}")
    result = subprocess.run([sys.executable, "-m", "pip", "install", "-r", req_file])
    if result.returncode == 0:
        print(f"✅ {flavour.capitalize()} dependencies installed")
        return True
    print(f"❌ pip exited with {result.returncode} for {req_file}")
    if flavour == "full":
        print("   Falling back to the minimal set (no pytest)...")
        return install_requirements("minimal")
    return False


def setup_directories():
    """Create the graph and report output directories."""
    for dir_path in ("graphs", "reports"):
        Path(dir_path).mkdir(parents=True, exist_ok=True)
    print("✅ Created graphs/ and reports/")


def setup_config_file():
    """Copy the default config to config/config.yaml unless one exists."""
    if os.path.exists("config/config.yaml"):
        print("✅ Keeping existing config/config.yaml")
        return True
    if not os.path.exists("config/default_config.yaml"):
        print("⚠️  Default config not found")
        return False
    shutil.copy("config/default_config.yaml", "config/config.yaml")
    print("✅ Created personal config file: config/config.yaml")

    answer = input("Brute-force subset limit max_n (Enter keeps 24): ").strip()
    if answer:
        try:
            max_n = int(answer)
        except ValueError:
            print(f"⚠️  '{answer}' is not an integer; keeping 24")
            return True
        text = Path("config/config.yaml").read_text()
        Path("config/config.yaml").write_text(text.replace("max_n: 24", f"max_n: {max_n}", 1))
        print(f"✅ max_n set to {max_n}")
    return True


def smoke_test():
    """Generate K4 and compute its gaps through the CLI."""
    graph = Path("graphs/k4.txt")
    try:
        subprocess.check_call([sys.executable, "src/spexlab.py", "graph", "--family", "complete",
                               "--param", "n=4", "--out", str(graph)])
        subprocess.check_call([sys.executable, "src/spexlab.py", "gaps", "--graph", str(graph),
                               "--out", "reports/k4_gaps.json"])
    except subprocess.CalledProcessError as e:
        print(f"❌ Smoke test failed with exit code {e.returncode}")
        return False
    print("✅ Smoke test passed (reports/k4_gaps.json)")
    return True


def main():
    print("spexlab - Setup")
    print("===============\n")

    if not check_python_version():
        sys.exit(1)

    setup_directories()

    print("\nDependencies:")
    print("1. Full (numpy, scipy, config, pytest)")
    print("2. Minimal (no pytest)")
    flavour = "minimal" if input("Choice [1]: ").strip() == "2" else "full"

    if not install_requirements(flavour):
        print("\n⚠️  Could not install dependencies; fix pip and rerun setup.py")
        sys.exit(1)

    config_ok = setup_config_file()
    smoke_ok = smoke_test()

    print("\n" + "=" * 50)
    if config_ok and smoke_ok:
        print("✅ spexlab is ready")
        print("   Try: python src/spexlab.py verify --seed 7")
    else:
        print("⚠️  Setup finished with problems:")
        if not config_ok:
            print("   - restore config/default_config.yaml")
        if not smoke_ok:
            print("   - run python src/spexlab.py gaps --graph graphs/k4.txt -v and read the log")


if __name__ == "__main__":
    if len(sys.argv) > 1:
        # Invoked by pip/setuptools with a build command: package metadata lives in pyproject.toml
        from setuptools import setup
        setup()
    else:
        main()
