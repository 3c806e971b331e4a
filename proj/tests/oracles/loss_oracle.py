#!/usr/bin/env python3
# Copyright 2026 The VernQA Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Independent evaluation of the in-batch softmax cross-entropy.

Prints the constants frozen in tests/oracles/loss_constants.h. Uses only
the math module so it shares nothing with the C++ implementation.
"""

import math


def batch_loss(s):
    total = 0.0
    for i, row in enumerate(s):
        z = math.fsum(math.exp(v) for v in row)
        total -= math.log(math.exp(row[i]) / z)
    return total / len(s)


if __name__ == "__main__":
    print("two_by_two  %.16g" % batch_loss([[2.0, 0.0], [0.0, 2.0]]))
    print("uniform_b4  %.16g" % batch_loss([[0.0] * 4 for _ in range(4)]))
    print("single      %.16g" % batch_loss([[3.7]]))
    print("three       %.16g" % batch_loss([[1.0, 2.0, 0.5], [0.0, 0.0, 3.0], [-1.0, 1.0, 1.5]]))
