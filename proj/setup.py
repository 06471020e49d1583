"""Builds the _dmsgd extension by delegating to the project's CMake build.

The CMake project is the single source of truth for compiler flags (in
particular -ffp-contract=off, which the reproducibility guarantees rely
on), so the extension is compiled through CMake rather than directly by
setuptools.
"""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeBuildExt(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).resolve().parent
        build_dir = Path(self.build_temp) / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)

        configure = [
            "cmake",
            "-S",
            str(source_dir),
            "-B",
            str(build_dir),
            "-DCMAKE_BUILD_TYPE=Release",
            f"-DPython3_EXECUTABLE={sys.executable}",
        ]
        subprocess.run(configure, check=True)
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_dmsgd", "-j"],
            check=True,
        )

        produced = sorted(build_dir.glob("_dmsgd*.so"))
        if not produced:
            raise RuntimeError("CMake build did not produce the _dmsgd extension")
        destination = Path(self.get_ext_fullpath(ext.name))
        destination.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(produced[-1], destination)


setup(
    ext_modules=[Extension("dmsgd._dmsgd", sources=[])],
    cmdclass={"build_ext": CMakeBuildExt},
)
