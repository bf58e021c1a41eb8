from setuptools import setup, find_packages

setup(
    name="hyperwitness",
    version="0.1.0",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    install_requires=[
        "numpy>=1.22.0",
        "scipy>=1.10.0",
        "pandas>=1.5.0",
        "pyyaml>=6.0",
        "click>=8.1.0",
    ],
    entry_points={
        "console_scripts": [
            "hyperwitness=hyperwitness.cli:main",
        ],
    },
    python_requires=">=3.10",
    description="Hyperentangled two-photon states, stabilizer witnesses and coincidence fringe analysis",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
)
