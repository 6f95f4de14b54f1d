/* Minimal annotated fragment: a single ignition toggle over the toy
 * two-mode view of the controller. Useful as a first target for the
 * annotation checker.
 */

int main(void) {
    if (!vIgnition) {
        @@ Assert ~Ignition;
        vIgnition = 1;
        @@ Update Ignition;
        vCC = mInactive;
        @@ Update CC=Inactive;
    }
    else {
        @@ Assert Ignition;
        vIgnition = 0;
        @@ Update ~Ignition;
        vCC = mOff;
        @@ Update CC=Off;
    }
    return 0;
}
