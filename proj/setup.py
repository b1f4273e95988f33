import os

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

sources = ["bindings/py_module.cpp"] + sorted(
    os.path.join("src", f) for f in os.listdir("src") if f.endswith(".cpp")
)

ext = Pybind11Extension(
    "bankdial._bankdial",
    sources,
    include_dirs=["include", "vendor", "/usr/include/eigen3"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
