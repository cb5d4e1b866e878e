// Regenerates data/tictactoe.csv: every distinct tic-tac-toe board reachable
// at the end of a game (x moves first, play stops at a win or a full board),
// labeled positive when x holds a three-in-a-row. Produces the familiar
// 958-row endgame dataset.
#include <array>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

namespace {

constexpr int kLines[8][3] = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {0, 3, 6},
                              {1, 4, 7}, {2, 5, 8}, {0, 4, 8}, {2, 4, 6}};

char winner(const std::array<char, 9>& b) {
    for (const auto& l : kLines)
        if (b[l[0]] != 'b' && b[l[0]] == b[l[1]] && b[l[1]] == b[l[2]]) return b[l[0]];
    return 0;
}

void play(std::array<char, 9>& b, char player, std::set<std::array<char, 9>>& out) {
    bool full = true;
    for (char c : b)
        if (c == 'b') full = false;
    if (winner(b) != 0 || full) {
        out.insert(b);
        return;
    }
    for (int i = 0; i < 9; ++i) {
        if (b[i] != 'b') continue;
        b[i] = player;
        play(b, player == 'x' ? 'o' : 'x', out);
        b[i] = 'b';
    }
}

}  // namespace

int main(int argc, char** argv) {
    const std::string path = argc > 1 ? argv[1] : "data/tictactoe.csv";
    std::set<std::array<char, 9>> boards;
    std::array<char, 9> empty;
    empty.fill('b');
    play(empty, 'x', boards);

    std::ofstream out(path);
    if (!out) {
        std::cerr << "cannot write " << path << "\n";
        return 1;
    }
    out << "s1,s2,s3,s4,s5,s6,s7,s8,s9,class\n";
    int positive = 0;
    for (const auto& b : boards) {
        for (char c : b) out << c << ',';
        const bool pos = winner(b) == 'x';
        positive += pos;
        out << (pos ? "positive" : "negative") << '\n';
    }
    std::cerr << boards.size() << " boards, " << positive << " positive -> " << path
              << "\n";
    return 0;
}
