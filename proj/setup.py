"""Builds the _core extension through the project's CMake tree."""

import os
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name: str, sourcedir: str = "") -> None:
        super().__init__(name, sources=[])
        self.sourcedir = os.fspath(Path(sourcedir).resolve())


class CMakeBuild(build_ext):
    def build_extension(self, ext: CMakeExtension) -> None:
        ext_path = Path.cwd() / self.get_ext_fullpath(ext.name)
        extdir = ext_path.parent.resolve()
        cfg = "Debug" if int(os.environ.get("DEBUG", 0)) else "Release"

        cmake_args = [
            f"-DCMAKE_BUILD_TYPE={cfg}",
            f"-DPython3_EXECUTABLE={sys.executable}",
            "-DBTCGP_BUILD_CLI=OFF",
            "-DBTCGP_BUILD_TESTING=OFF",
            "-DBTCGP_BUILD_PYTHON=ON",
        ]
        build_temp = Path(self.build_temp) / ext.name
        build_temp.mkdir(parents=True, exist_ok=True)

        subprocess.run(["cmake", ext.sourcedir, *cmake_args], cwd=build_temp, check=True)
        subprocess.run(
            ["cmake", "--build", ".", "--target", "btcgp_python", "-j"],
            cwd=build_temp,
            check=True,
        )

        built = build_temp / "python" / "btcgp"
        extdir.mkdir(parents=True, exist_ok=True)
        for artifact in built.glob("_core*"):
            self.copy_file(artifact, extdir / artifact.name)


setup(
    packages=["btcgp"],
    package_dir={"": "python"},
    ext_modules=[CMakeExtension("btcgp._core")],
    cmdclass={"build_ext": CMakeBuild},
    zip_safe=False,
)
