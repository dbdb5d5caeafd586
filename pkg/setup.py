import os

from setuptools import setup, find_packages

# Try to load the version from a datafile in the package
package_version = "1.0.0.dev0"
package_version_path = os.path.join(os.path.dirname(__file__), 'curve_proximity', 'VERSION')
if os.path.exists(package_version_path):
    with open(package_version_path) as package_version_file:
        package_version = package_version_file.read().strip()

# read the contents of your README file
this_directory = os.path.abspath(os.path.dirname(__file__))
with open(os.path.join(this_directory, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

setup(
    name="curve-proximity",
    version=package_version,
    description="Adaptive nearest and farthest point queries on Lipschitz curves",
    long_description=long_description,
    long_description_content_type='text/markdown',
    license="MIT",
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Mathematics',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
    ],
    keywords="lipschitz curve nearest point farthest point adaptive sampling proof set ellipse",
    packages=find_packages(exclude=['test', 'test.*']),
    install_requires=[
        'numpy',
        'scipy',
        'pyyaml',
        'werkzeug',
        'flask',
        'gunicorn',
        'gevent',
    ],
    extras_require={
        'test': [
            'pytest',
            'pytest-cov',
        ],
    },
    entry_points={
        'console_scripts': [
            'curve-proximity=curve_proximity.cli:main',
        ],
    },
    package_data={
        'curve_proximity': [
            "VERSION"
        ]
    }
)
