from glob import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

setup(
    ext_modules=[
        Pybind11Extension(
            "qmf",
            sorted(glob("src/*.cpp")) + ["bindings/qmf_module.cpp"],
            include_dirs=["include", "vendor"],
            cxx_std=20,
        )
    ],
    cmdclass={"build_ext": build_ext},
)
