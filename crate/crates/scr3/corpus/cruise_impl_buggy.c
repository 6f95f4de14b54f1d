/* Event-loop implementation of the cruise control mode logic.
 *
 * Each sensor edge arrives as one event. A handler first records the new
 * sensor value, then walks the mode dispatch for the transitions that the
 * edge can fire. Controlled outputs are left to a separate actuator task
 * and are not updated here.
 */

#include "cruise_events.h"

enum { mOff, mInactive, mCruise, mOverride };

int main(void) {
    int vCC = mOff;
    int vIgnition = 0;
    int vRunning = 0;
    int vToofast = 0;
    int vBrake = 0;
    int vAccel = 0;
    int vCruiseBtn = 0;
    int vResumeBtn = 0;
    int vOffBtn = 0;
    int vSpeedSlow = 1;
    int vSpeedOk = 0;
    int vSpeedFast = 0;
    int vKeepRunning = 1;
    int ev;

    @@ Initial CC=Off & ~Ignition & ~Running & ~Toofast & ~Brake & ~Accel & ~b_Cruise & ~b_Resume & ~b_Off & speed_slow & ~speed_ok & ~speed_fast;

    while (vKeepRunning) {
        ev = get_next_event();

        if (ev == EV_IGNITION_ON) {
            vIgnition = 1;
            @@ Update Ignition;
            if (vCC == mOff) {
                @@ Assert CC=Off;
                vCC = mInactive;
                @@ Update CC=Inactive;
            }
        }
        else if (ev == EV_IGNITION_OFF) {
            vIgnition = 0;
            @@ Update ~Ignition;
            if (vCC == mInactive) {
                @@ Assert CC=Inactive;
                vCC = mOff;
                @@ Update CC=Off;
            }
            else if (vCC == mCruise) {
                @@ Assert CC=Cruise;
                vCC = mOff;
                @@ Update CC=Off;
            }
            else if (vCC == mOverride) {
                @@ Assert CC=Override;
                vCC = mOff;
                @@ Update CC=Off;
            }
        }
        else if (ev == EV_ENGINE_ON) {
            vRunning = 1;
            @@ Update Running;
        }
        else if (ev == EV_ENGINE_OFF) {
            vRunning = 0;
            @@ Update ~Running;
            if (vCC == mCruise) {
                @@ Assert CC=Cruise;
                vCC = mInactive;
                @@ Update CC=Inactive;
            }
            else if (vCC == mOverride) {
                @@ Assert CC=Override;
                vCC = mInactive;
                @@ Update CC=Inactive;
            }
        }
        else if (ev == EV_TOOFAST_ON) {
            vToofast = 1;
            @@ Update Toofast;
            if (vCC == mCruise) {
                @@ Assert CC=Cruise;
                vCC = mInactive;
                @@ Update CC=Inactive;
            }
        }
        else if (ev == EV_TOOFAST_OFF) {
            vToofast = 0;
            @@ Update ~Toofast;
        }
        else if (ev == EV_BRAKE_DOWN) {
            vBrake = 1;
            @@ Update Brake;
            if (vCC == mCruise) {
                @@ Assert CC=Cruise;
                vCC = mOverride;
                @@ Update CC=Override;
            }
        }
        else if (ev == EV_BRAKE_UP) {
            vBrake = 0;
            @@ Update ~Brake;
        }
        else if (ev == EV_ACCEL_DOWN) {
            vAccel = 1;
            @@ Update Accel;
            if (vCC == mCruise) {
                @@ Assert CC=Cruise;
                vCC = mOverride;
                @@ Update CC=Override;
            }
        }
        else if (ev == EV_ACCEL_UP) {
            vAccel = 0;
            @@ Update ~Accel;
        }
        else if (ev == EV_BTN_CRUISE_DOWN) {
            vCruiseBtn = 1;
            @@ Update b_Cruise;
            if (vCC == mInactive) {
                @@ Assert CC=Inactive;
                if (vRunning) {
                    @@ Assert Running;
                    if (!vToofast) {
                        @@ Assert ~Toofast;
                        if (!vBrake) {
                            @@ Assert ~Brake;
                            if (!vAccel) {
                                @@ Assert ~Accel;
                                vCC = mOverride;
                                @@ Update CC=Override;
                            }
                        }
                    }
                }
            }
            else if (vCC == mOverride) {
                @@ Assert CC=Override;
                if (!vToofast) {
                    @@ Assert ~Toofast;
                    if (!vBrake) {
                        @@ Assert ~Brake;
                        if (!vAccel) {
                            @@ Assert ~Accel;
                            vCC = mCruise;
                            @@ Update CC=Cruise;
                        }
                    }
                }
            }
        }
        else if (ev == EV_BTN_CRUISE_UP) {
            vCruiseBtn = 0;
            @@ Update ~b_Cruise;
        }
        else if (ev == EV_BTN_RESUME_DOWN) {
            vResumeBtn = 1;
            @@ Update b_Resume;
            if (vCC == mOverride) {
                @@ Assert CC=Override;
                vCC = mCruise;
                @@ Update CC=Cruise;
            }
        }
        else if (ev == EV_BTN_RESUME_UP) {
            vResumeBtn = 0;
            @@ Update ~b_Resume;
        }
        else if (ev == EV_BTN_OFF_DOWN) {
            vOffBtn = 1;
            @@ Update b_Off;
            if (vCC == mCruise) {
                @@ Assert CC=Cruise;
                vCC = mOverride;
                @@ Update CC=Override;
            }
        }
        else if (ev == EV_BTN_OFF_UP) {
            vOffBtn = 0;
            @@ Update ~b_Off;
        }
        else if (ev == EV_SPEED_SLOW) {
            vSpeedSlow = 1;
            @@ Update speed_slow;
            vSpeedOk = 0;
            @@ Update ~speed_ok;
            vSpeedFast = 0;
            @@ Update ~speed_fast;
        }
        else if (ev == EV_SPEED_OK) {
            vSpeedOk = 1;
            @@ Update speed_ok;
            vSpeedSlow = 0;
            @@ Update ~speed_slow;
            vSpeedFast = 0;
            @@ Update ~speed_fast;
        }
        else if (ev == EV_SPEED_FAST) {
            vSpeedFast = 1;
            @@ Update speed_fast;
            vSpeedSlow = 0;
            @@ Update ~speed_slow;
            vSpeedOk = 0;
            @@ Update ~speed_ok;
        }
        else if (ev == EV_SHUTDOWN) {
            vKeepRunning = 0;
        }
    }
    return 0;
}
