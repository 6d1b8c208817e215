// Copyright 2026 The InvRat Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef INVRAT_IO_HPP_
#define INVRAT_IO_HPP_

#include <string>

namespace invrat {

std::string ReadFile(const std::string& path);

// Writes to a sibling temporary and renames over `path`, so a failed write
// never clobbers an existing file.
void WriteFileAtomic(const std::string& path, const std::string& contents);

}  // namespace invrat

#endif  // INVRAT_IO_HPP_
