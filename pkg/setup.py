from setuptools import find_packages, setup

long_description = open('README.md').read()
setup(
    name='fairness-manager',
    packages=find_packages(exclude=['tests', 'tests.*']),
    version='0.1.0',
    description='Fairness audits, fairness-constrained trees, bias \
    mitigation and fairness monitoring for tabular classifiers',
    long_description=long_description,
    long_description_content_type='text/markdown',
    include_package_data=True,
    install_requires=[
        'numpy>=1.22', 'pandas>=1.3', 'scipy>=1.7', 'scikit-learn>=1.0',
        'python-slugify>=4.0', 'requests>=2.20'
    ],
    extras_require={'test': ['pytest>=6']},
    entry_points={
        'console_scripts': [
            'fairness-manager=fairness_manager.cli:main',
        ],
    },
    keywords=[
        'fairness', 'bias', 'decision tree', 'demographic parity',
        'equal opportunity', 'shapley', 'monitoring'
    ],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Topic :: Scientific/Engineering :: Artificial Intelligence"
    ],
    license="BSD",
)
