from setuptools import setup, find_packages

VERSION = '0.1.0'
DESCRIPTION = 'Paul ion trap modeling'
LONG_DESCRIPTION = ('Electrode fields, Mathieu stability, pseudopotential, ion dynamics and '
                    'cooling/gate-error budgets for 3D and surface RF ion traps')

# Setting up
setup(
    name="PaulSim",
    version=VERSION,
    description=DESCRIPTION,
    long_description_content_type="text/markdown",
    long_description=LONG_DESCRIPTION,
    packages=find_packages(exclude=['tests']),
    package_data={'PaulSim.fields': ['data/*.json']},
    python_requires='>=3.8',
    install_requires=['numpy', 'scipy', 'scikit-learn', 'pandas', 'joblib', 'threadpoolctl',
                      'tqdm', 'colorlog', 'h5py'],
    extras_require={'test': ['pytest']},
    entry_points={'console_scripts': ['paulsim = PaulSim.scripts.run_paulsim:main']},
    keywords=['python', 'ion trap', 'Paul trap', 'Mathieu equation', 'boundary element method'],
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Operating System :: Unix",
        "Operating System :: MacOS :: MacOS X",
        "Operating System :: Microsoft :: Windows",
    ]
)
